#!/usr/bin/env python3
"""Build the bundled fixtures: the demo fixture store and the synthetic
labeled training set. Deterministic; run from the repo root:

    python scripts/make_fixtures.py
"""

import csv
import json
import math
import os

from squadkit.features import write_labeled_csv
from squadkit.similarity import EmbeddingStore, write_embeddings
from squadkit.synthetic import make_labeled_dataset

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")
DEMO = os.path.join(FIXTURES, "demo")

EMB_DIM = 8


def unit_vector_at_distance(distance: float) -> list[float]:
    """Unit vector whose Euclidean distance from e0 is `distance`."""
    cos = 1.0 - distance ** 2 / 2.0
    sin = math.sqrt(max(0.0, 1.0 - cos * cos))
    return [cos, sin] + [0.0] * (EMB_DIM - 2)


SEED_ACCOUNT = {
    "username": "stellarnova",
    "profile_name": "Stellar Nova",
    "bio": "Official account. Singer, dreamer, cosmos enthusiast.",
    "url": "https://stellarnova.example/music",
    "location": "Los Angeles, CA",
    "friends_count": 150,
    "followers_count": 2_000_000,
    "tweet_count": 5400,
    "retweet_count": 1200,
    "is_private": False,
    "embedding_ref": "emb-stellarnova",
}

# Three crafted impersonators: same display name, matching profile image,
# unrelated bio, no follow edge to the seed.
IMPERSONATORS = [
    {
        "username": "stellarnova1",
        "profile_name": "Stellar Nova",
        "bio": "Huge giveaway every week! DM to claim your prize",
        "url": "",
        "location": "Los Angeles, CA",
        "friends_count": 23,
        "followers_count": 3_000_000,  # outranks the seed in prefix search
        "tweet_count": 140,
        "retweet_count": 310,
        "is_private": False,
        "embedding_ref": "emb-stellarnova1",
    },
    {
        "username": "ste1larnova",
        "profile_name": "Stellar Novva",
        "bio": "Crypto signals and exclusive drops",
        "url": "stellarnova-vip.example",
        "location": "",
        "friends_count": 48,
        "followers_count": 12_000,
        "tweet_count": 420,
        "retweet_count": 95,
        "is_private": False,
        "embedding_ref": "emb-ste1larnova",
    },
    {
        "username": "_stellarnova",
        "profile_name": "Stellar Nova",
        "bio": "DM for promo deals and shoutouts",
        "url": "",
        "location": "",
        "friends_count": 5,
        "followers_count": 8_000,
        "tweet_count": 60,
        "retweet_count": 12,
        "is_private": False,
        "embedding_ref": "emb-_stellarnova",
    },
]

# Crafted to be flagged by the classifier and then demoted by the
# fan/parody post-filter.
PARODY = {
    "username": "stellarnovaa",
    "profile_name": "Stellar Nova",
    "bio": "Parody account. Not affiliated with the real star.",
    "url": "",
    "location": "",
    "friends_count": 80,
    "followers_count": 54_000,
    "tweet_count": 500,
    "retweet_count": 150,
    "is_private": False,
    "embedding_ref": "emb-stellarnovaa",
}

BENIGN = [
    {
        "username": "stellarnova2",
        "profile_name": "Maya Thompson",
        "bio": "Coffee lover. Tweets about gardening and cats ❤",
        "url": "",
        "location": "Portland, OR",
        "friends_count": 342,
        "followers_count": 410,
        "tweet_count": 2100,
        "retweet_count": 400,
        "is_private": False,
        "embedding_ref": None,
    },
    {
        "username": "9stellarnova",
        "profile_name": "Galaxy News Feed",
        "bio": "Daily space news and rocket launches",
        "url": "galaxynews.example",
        "location": "",
        "friends_count": 890,
        "followers_count": 23_000,
        "tweet_count": 15000,
        "retweet_count": 5200,
        "is_private": False,
        "embedding_ref": None,
    },
    {
        "username": "stellarnova_",
        "profile_name": "Nova Fan Club",
        "bio": "Fan club for all Stellar Nova updates",
        "url": "",
        "location": "",
        "friends_count": 1200,
        "followers_count": 9_800,
        "tweet_count": 3400,
        "retweet_count": 800,
        "is_private": False,
        "embedding_ref": None,
    },
    {
        "username": "stelllarnova",
        "profile_name": "Random Guy",
        "bio": "Just here scrolling",
        "url": "",
        "location": "Austin, TX",
        "friends_count": 77,
        "followers_count": 52,
        "tweet_count": 310,
        "retweet_count": 20,
        "is_private": False,
        "embedding_ref": "emb-stelllarnova",  # NOFACE marker below
    },
    {
        "username": "stellarnove",
        "profile_name": "Stella Reyes",
        "bio": "Photographer. Nature and light.",
        "url": "stellareyes.example",
        "location": "Lisbon",
        "friends_count": 520,
        "followers_count": 1_900,
        "tweet_count": 1800,
        "retweet_count": 75,
        "is_private": False,
        "embedding_ref": None,
    },
    {
        "username": "stellernova",
        "profile_name": "Musik Daily",
        "bio": "Music charts and playlists",
        "url": "",
        "location": "",
        "friends_count": 150,
        "followers_count": 7_600,
        "tweet_count": 7400,
        "retweet_count": 1900,
        "is_private": False,
        "embedding_ref": "emb-stellernova",
    },
    {
        "username": "stearnova",
        "profile_name": "Ben Carter",
        "bio": "Dad. Runner. Occasional gamer.",
        "url": "",
        "location": "Leeds",
        "friends_count": 260,
        "followers_count": 180,
        "tweet_count": 950,
        "retweet_count": 60,
        "is_private": True,
        "embedding_ref": None,
    },
    {
        "username": "stellarn0va",
        "profile_name": "Space Memes",
        "bio": "Memes about the cosmos posted daily",
        "url": "",
        "location": "",
        "friends_count": 45,
        "followers_count": 31_000,
        "tweet_count": 4300,
        "retweet_count": 2100,
        "is_private": False,
        "embedding_ref": None,
    },
]

# Ordinary users appearing as mentioners in the tweet fixture.
BYSTANDERS = [
    {
        "username": "cosmicchris",
        "profile_name": "Chris Vega",
        "bio": "Stargazer",
        "url": "",
        "location": "",
        "friends_count": 120,
        "followers_count": 85,
        "tweet_count": 640,
        "retweet_count": 30,
        "is_private": False,
        "embedding_ref": None,
    },
    {
        "username": "dailyj",
        "profile_name": "Jess Morgan",
        "bio": "Pop culture notes",
        "url": "",
        "location": "",
        "friends_count": 310,
        "followers_count": 204,
        "tweet_count": 1900,
        "retweet_count": 110,
        "is_private": False,
        "embedding_ref": None,
    },
]

EDGES = [
    # Benign variant holders following the seed account.
    ("stellarnova2", "stellarnova"),
    ("9stellarnova", "stellarnova"),
    ("stellarnova_", "stellarnova"),
    ("stellarnove", "stellarnova"),
    ("stearnova", "stellarnova"),
    # Makes one mention purposeful.
    ("cosmicchris", "stellarnova1"),
]

TWEETS = [
    {
        "tweet_id": "1001", "mentioner": "dailyj", "mentioned_variant": "stellarnova1",
        "seed": "stellarnova", "kind": "actual_tweet", "like_count": 44,
        "retweet_count": 7,
        "text": "Can't wait for the new album @stellarnova1",
    },
    {
        "tweet_id": "1002", "mentioner": "cosmicchris", "mentioned_variant": "stellarnova1",
        "seed": "stellarnova", "kind": "actual_tweet", "like_count": 3,
        "retweet_count": 0,
        "text": "shoutout to my friend @stellarnova1",
    },
    {
        "tweet_id": "1003", "mentioner": "dailyj", "mentioned_variant": "_stellarnova",
        "seed": "stellarnova", "kind": "actual_tweet", "like_count": 12,
        "retweet_count": 1,
        "text": "loved the show @_stellarnova",
    },
    {
        "tweet_id": "1004", "mentioner": "cosmicchris", "mentioned_variant": "stellarnova1",
        "seed": "stellarnova", "kind": "retweet", "like_count": 0,
        "retweet_count": 0,
        "text": "RT can't wait for the new album @stellarnova1",
    },
    {
        "tweet_id": "1005", "mentioner": "dailyj", "mentioned_variant": "stellarnovaa",
        "seed": "stellarnova", "kind": "reply", "like_count": 1,
        "retweet_count": 0,
        "text": "@stellarnovaa is this real?",
    },
    {
        "tweet_id": "1006", "mentioner": "stellarnova1", "mentioned_variant": "ste1larnova",
        "seed": "stellarnova", "kind": "actual_tweet", "like_count": 210,
        "retweet_count": 89,
        "text": "Follow me and @ste1larnova for daily giveaways http://prize-drop.example/claim",
    },
    {
        "tweet_id": "1007", "mentioner": "ste1larnova", "mentioned_variant": "stellarnova1",
        "seed": "stellarnova", "kind": "actual_tweet", "like_count": 95,
        "retweet_count": 12,
        "text": "Verified giveaways only at https://stellarnova-vip.example",
    },
]

SUSPENDED = ["stellarnova3", "stellarnova123"]


def build_demo() -> None:
    os.makedirs(DEMO, exist_ok=True)

    accounts = [SEED_ACCOUNT] + IMPERSONATORS + [PARODY] + BENIGN + BYSTANDERS
    with open(os.path.join(DEMO, "accounts.jsonl"), "w", encoding="utf-8") as fh:
        for payload in accounts:
            fh.write(json.dumps(payload, sort_keys=True) + "\n")

    with open(os.path.join(DEMO, "statuses.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["username", "status"])
        for name in SUSPENDED:
            writer.writerow([name, "suspended"])

    with open(os.path.join(DEMO, "edges.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["follower", "followee"])
        for follower, followee in EDGES:
            writer.writerow([follower, followee])

    with open(os.path.join(DEMO, "tweets.jsonl"), "w", encoding="utf-8") as fh:
        for payload in TWEETS:
            fh.write(json.dumps(payload, sort_keys=True) + "\n")

    store = EmbeddingStore(dim=EMB_DIM)
    store.add("emb-stellarnova", tuple([1.0] + [0.0] * (EMB_DIM - 1)))
    store.add("emb-stellarnova1", tuple(unit_vector_at_distance(0.30)))
    store.add("emb-ste1larnova", tuple(unit_vector_at_distance(0.42)))
    store.add("emb-_stellarnova", tuple(unit_vector_at_distance(0.25)))
    store.add("emb-stellarnovaa", tuple(unit_vector_at_distance(0.35)))
    store.add("emb-stellernova", tuple([0.0, 1.0] + [0.0] * (EMB_DIM - 2)))
    store.mark_missing("emb-stelllarnova")
    write_embeddings(os.path.join(DEMO, "embeddings.vec"), store)

    with open(os.path.join(DEMO, "categories.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["username", "category"])
        writer.writerow(["stellarnova", "entertainment"])


def build_labeled() -> None:
    os.makedirs(FIXTURES, exist_ok=True)
    dataset = make_labeled_dataset()
    write_labeled_csv(os.path.join(FIXTURES, "labeled_pairs.csv"), dataset)


if __name__ == "__main__":
    build_demo()
    build_labeled()
    print(f"fixtures written under {FIXTURES}")
