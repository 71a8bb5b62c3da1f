"""Bundled emoji-to-word table used by bio tokenization.

Covers the emoji commonly seen in account bios. Tokenization replaces each
codepoint with its short name surrounded by spaces, so an emoji contributes
one token to the bio's token set. The table is an argument everywhere it is
used, so callers can extend or replace it.
"""

DEFAULT_EMOJI_NAMES: dict[str, str] = {
    "❤": "red_heart",
    "\U0001F499": "blue_heart",
    "\U0001F49C": "purple_heart",
    "\U0001F5A4": "black_heart",
    "\U0001F494": "broken_heart",
    "\U0001F525": "fire",
    "⭐": "star",
    "✨": "sparkles",
    "\U0001F31F": "glowing_star",
    "\U0001F451": "crown",
    "\U0001F48E": "gem",
    "\U0001F4AF": "hundred",
    "✅": "check_mark",
    "✔": "check_mark",
    "❌": "cross_mark",
    "\U0001F680": "rocket",
    "\U0001F4B0": "money_bag",
    "\U0001F4B8": "money_wings",
    "\U0001F3B5": "music_note",
    "\U0001F3B6": "music_notes",
    "\U0001F3A4": "microphone",
    "\U0001F3AC": "clapper",
    "\U0001F3C6": "trophy",
    "⚽": "soccer_ball",
    "\U0001F3C0": "basketball",
    "\U0001F4F8": "camera",
    "\U0001F4F7": "camera",
    "\U0001F426": "bird",
    "\U0001F98B": "butterfly",
    "\U0001F339": "rose",
    "\U0001F33B": "sunflower",
    "☀": "sun",
    "\U0001F319": "crescent_moon",
    "\U0001F30D": "globe",
    "\U0001F30E": "globe",
    "\U0001F62D": "loud_cry",
    "\U0001F602": "joy",
    "\U0001F60D": "heart_eyes",
    "\U0001F64F": "folded_hands",
    "\U0001F4AA": "flexed_biceps",
    "\U0001F44D": "thumbs_up",
    "\U0001F447": "point_down",
    "\U0001F446": "point_up",
    "\U0001F449": "point_right",
    "\U0001F448": "point_left",
    "\U0001F517": "link",
    "\U0001F4E9": "envelope",
    "\U0001F6A8": "siren",
    "\U0001F195": "new",
}
