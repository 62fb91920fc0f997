"""Regenerate src/texeval/data/sample_captions.txt.

Image-caption-like sentences from a small topical grammar: each caption
picks a scene, and the scene constrains subjects, actions, objects and
places, so words co-occur in topical clusters the way real captions do.

    python tools/make_sample_corpus.py [--count 20000] [--seed 2018]
"""

import argparse
from pathlib import Path

import numpy as np

SCENES = {
    "street": dict(
        subjects=["man", "woman", "person", "young man", "cyclist", "boy"],
        actions=["riding", "pushing", "walking next to", "standing beside", "parking"],
        objects=["bike", "bicycle", "motorcycle", "scooter", "skateboard"],
        places=["down the street", "on a busy road", "near a crosswalk", "on the sidewalk",
                "in the city"],
        adjs=["red", "old", "black", "small", "yellow"],
    ),
    "kitchen": dict(
        subjects=["woman", "man", "chef", "cook", "girl"],
        actions=["cutting", "preparing", "cooking", "holding", "slicing"],
        objects=["pizza", "sandwich", "vegetables", "cake", "bowl of soup", "plate of food"],
        places=["in a kitchen", "on a counter", "at the stove", "on a wooden table",
                "in a restaurant"],
        adjs=["large", "fresh", "hot", "small", "homemade"],
    ),
    "beach": dict(
        subjects=["surfer", "man", "woman", "child", "group of people"],
        actions=["carrying", "riding", "flying", "holding", "sitting on"],
        objects=["surfboard", "kite", "wave", "umbrella", "towel"],
        places=["on the beach", "in the ocean", "near the water", "on the sand",
                "along the shore"],
        adjs=["white", "blue", "colorful", "big", "long"],
    ),
    "field": dict(
        subjects=["dog", "horse", "cow", "sheep", "herd of cattle", "giraffe"],
        actions=["grazing in", "running through", "standing in", "walking across", "lying in"],
        objects=["grass", "field", "meadow", "pasture", "dirt"],
        places=["under a tree", "near a fence", "on a sunny day", "next to a barn",
                "in the countryside"],
        adjs=["brown", "green", "tall", "open", "grassy"],
    ),
    "station": dict(
        subjects=["train", "bus", "passenger train", "double decker bus", "truck"],
        actions=["pulling into", "driving past", "stopped at", "parked at", "leaving"],
        objects=["station", "platform", "terminal", "bus stop", "depot"],
        places=["on the tracks", "in the rain", "at night", "near a building",
                "during the day"],
        adjs=["red", "blue", "long", "empty", "crowded"],
    ),
    "sports": dict(
        subjects=["tennis player", "baseball player", "batter", "skier", "snowboarder"],
        actions=["swinging", "hitting", "throwing", "catching", "holding"],
        objects=["tennis racket", "baseball bat", "ball", "frisbee", "ski poles"],
        places=["on a court", "on the field", "down a snowy hill", "at a stadium",
                "during a game"],
        adjs=["white", "professional", "young", "fast", "yellow"],
    ),
    "living": dict(
        subjects=["cat", "dog", "little girl", "man", "woman"],
        actions=["sitting on", "sleeping on", "lying next to", "looking at", "playing with"],
        objects=["couch", "laptop", "bed", "television", "remote control", "teddy bear"],
        places=["in a living room", "in a bedroom", "near a window", "on the floor",
                "in front of a tv"],
        adjs=["gray", "soft", "black", "cozy", "white"],
    ),
}

TEMPLATES = [
    "a {adj} {subject} {action} a {object} {place}",
    "a {subject} {action} a {adj} {object}",
    "a {subject} {action} a {object} {place}",
    "the {subject} is {action} a {adj} {object} {place}",
    "two {subjects} {action} a {object}",
    "a {adj} {object} {place} with a {subject}",
    "there is a {subject} {action} the {object} {place}",
]


def pick(rng, items, skew=1.1):
    """Zipf-like choice so some words are much more common than others."""
    w = 1.0 / np.arange(1, len(items) + 1) ** skew
    return items[rng.choice(len(items), p=w / w.sum())]


def plural(noun):
    if noun.endswith("man"):
        return noun[:-3] + "men"
    if noun.endswith(("sheep", "cattle", "people")):
        return noun
    return noun + "s"


def caption(rng, scene_names):
    scene = SCENES[pick(rng, scene_names, skew=0.5)]
    fields = {key[:-1]: pick(rng, val) for key, val in scene.items()}
    fields["subjects"] = plural(fields["subject"])
    return pick(rng, TEMPLATES, skew=0.7).format(**fields)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=2018)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                         / "src" / "texeval" / "data" / "sample_captions.txt"))
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    names = sorted(SCENES)
    lines = [caption(rng, names) for _ in range(args.count)]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} captions to {args.out}")


if __name__ == "__main__":
    main()
