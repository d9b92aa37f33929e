#!/usr/bin/env python3
"""Writes the offline fixture corpus used by the tests and the demo run.

Every video gets synthetic captions, a tiny WAV file and canned transcripts
for two mock engines. Output is a pure function of this script, so running
it again reproduces the tree byte for byte.

    python3 tools/make_fixtures.py [output_dir]
"""

import hashlib
import json
import random
import struct
import sys
from pathlib import Path

CATEGORIES = [
    ("2", "Autos & Vehicles", [
        "sM0znZ_Ur8E", "rDg-yena4Ec", "HpxdGq0NECw", "0UplB_26F3Y", "EidxYt03zeM",
        "1Ja9gzsh8So", "583OJ0F31lM", "RkbzA-0VnU4", "VvjpX_p5cXU", "bwoHmubxDIg"]),
    ("23", "Comedy", [
        "xCyebt737pU", "i7nmnWXQgVw", "7aEqxAxwRuw", "asY7CQJkUa8", "Vx1-HS3q0wQ",
        "hdPCNwXE3GU", "Bq7O57JOFAM", "V-9pGpCgoGQ", "4TIIdrOfbls", "b277LPZyJUk"]),
    ("27", "Education", [
        "-TrHHGKQxcI", "wX78iKhInsc", "y3fm6wNzK70", "S294zRodS_4", "7n2hCebmT4c",
        "cGkQil14LPQ", "rhgwIhB58PA", "g1pb2aK2we4", "w5zV_GusqvQ"]),
    ("24", "Entertainment", [
        "A9yhyB9VSsc", "4pJBUAymAU8", "aF57wvoVplg", "JkSB4eOBe6w", "Mc-WiSHXq1g",
        "K_WZo6Yfl9Q", "fYfFBrROcxM", "_PfWOgVtijc", "z2WclC-UubY"]),
    ("1", "Film & Animation", [
        "kNw8V_Fkw28", "AZS5cgybKcI", "3Aq6UtLKtzM", "1D7D3_HFB3o", "D_Rx4qZ8QRc",
        "8uj0Vy8oMkw", "a2wpvc96i24", "t023ryQgguQ", "gZyjJtBIlow"]),
    ("26", "Howto & Style", [
        "Pp_7rK7BJ5Q", "6QKZM3EZ4ng", "VQeNtw3SHqo", "WEGmOnpOvRM", "kUE2fPLOUxo",
        "-eqcnPq2xdE", "XmQ8mZFqczw", "n781HdPa7pA", "6xl0fGqsUA4", "BY3sQ-mZgqs"]),
    ("10", "Music", [
        "b1kbLwvqugk", "WcIcVapfqXw", "Y2NkuFIlLEo", "hT_nvWreIhg", "fV4DiAyExN0",
        "f74GYIVMk3I", "Soa3gO7tL-c", "D2KE2a5qo0g", "Uq9gPaIzbe8"]),
    ("25", "News & Politics", [
        "bb1WJquq8jI", "2k6_7NJsX4k", "4d0ife1L3mM", "uiwxkvgno1k", "LQzsQU7_hVw",
        "cjVoABxV0NA", "iF0MLrl44sc", "GPirQlhXCls", "cdjScH9BLVw", "OxrfdrEO1m4"]),
    ("29", "Nonprofits & Activism", [
        "UzdF2zpex8o", "UaDqc1dT7Rc", "mrPjz30rAVQ", "5IlKJGV_Z_8", "Z-6IfEoETyU",
        "KEoxUw-gwec", "JyPf7uoCGyE", "Yt38f7A_Rwo", "3m6OGbLTQgY", "cSvKk0iySnU"]),
    ("22", "People & Blogs", [
        "lj5GXZaE7qs", "MujDIvNQQoI", "waL3eqJBwIk", "7AeMhVN-TFA", "WgPZt7WGZJk",
        "Ij7KyhaBdJ8", "h1yvhYsueAk", "bcb0Ig_Jv5E"]),
    ("15", "Pets & Animals", [
        "JbioSJtMkwQ", "ABgQYcyhCgg", "Dl9Sa4H5TM0", "ZtasaWN6WaU", "mKoF48g89s4",
        "j0SF0A6aDOU", "geIWxM7QvKE", "lGjSbHgX4jk", "wRpvm3B5Ocg", "4Co4mDeCIJ4"]),
    ("28", "Science & Technology", [
        "Oa9aWdcCC4o", "5pVjCJDAyhk", "V1HHvnd22lQ", "OyQ3B1U8_XY", "t7RaVnEGkc0",
        "dhq2WPLKiuY", "TYuJdnn6NyE", "SEI0LtUmpn4", "6ulwahtVQAU", "ONs9FCY74p0"]),
    ("19", "Travel & Events", [
        "kFMHx6XwBk0", "VxMHHqSOSTk", "WLSnrXEtrT4", "RB1MN0QoXH0", "Wt4XODPm4hA",
        "Cqawiry5HTY", "0RoA5QEm8fc", "9wbNabuP6aM", "dBdthTOx9YU", "dNU1lJiDaSY"]),
]

TOPICS = {
    "Autos & Vehicles": ["engine", "brakes", "tyres", "gearbox", "mileage", "dashboard", "torque", "exhaust"],
    "Comedy": ["joke", "punchline", "audience", "sketch", "neighbour", "sandwich", "wedding", "umbrella"],
    "Education": ["lesson", "equation", "history", "chapter", "theorem", "grammar", "experiment", "answer"],
    "Entertainment": ["trailer", "episode", "character", "premiere", "interview", "award", "season", "studio"],
    "Film & Animation": ["scene", "frame", "storyboard", "director", "animation", "soundtrack", "camera", "villain"],
    "Howto & Style": ["recipe", "haircut", "fabric", "colour", "brush", "shelf", "garden", "makeup"],
    "Music": ["chorus", "guitar", "melody", "rhythm", "verse", "drummer", "album", "concert"],
    "News & Politics": ["election", "minister", "budget", "report", "council", "policy", "vote", "economy"],
    "Nonprofits & Activism": ["volunteers", "donation", "campaign", "community", "shelter", "charity", "rights", "clinic"],
    "People & Blogs": ["morning", "routine", "family", "weekend", "coffee", "apartment", "journey", "friends"],
    "Pets & Animals": ["puppy", "parrot", "aquarium", "kitten", "leash", "vet", "feather", "hamster"],
    "Science & Technology": ["battery", "processor", "telescope", "molecule", "sensor", "robot", "software", "satellite"],
    "Travel & Events": ["airport", "festival", "beach", "museum", "mountain", "hotel", "market", "passport"],
}

SUBJECTS = ["we", "you", "I", "the team", "my friend", "everyone here", "our guest", "the host"]
VERBS = ["look at", "talk about", "check", "explain", "compare", "fix", "show you", "think about"]
ADJECTIVES = ["new", "old", "simple", "strange", "big", "quiet", "favourite", "little", "bright", "tricky"]
LINKS = ["and then", "because", "but", "so", "while", "after that", "before", "which means"]
ADVERBS = ["today", "carefully", "again", "right now", "slowly", "together", "later", "first"]
# paired spellings the normalizer maps onto each other
VARIANTS = {"colour": "color", "favourite": "favorite", "neighbour": "neighbor", "tyres": "tires"}
# phrases a recogniser might render as contractions
CONTRACT = {"we are": "we're", "do not": "don't", "it is": "it's", "I am": "I'm", "you are": "you're"}
FILLERS = ["um", "uh", "hmm"]

# Keyword-stuffed captions: the uploader pasted search tags instead of speech.
SEO_ID = "JbioSJtMkwQ"
SEO_CAPTION = (
    "dog, dogs, funny dog, funny dogs, dog video, cute dog, dogs, cute dogs, funny dog, dog videos"
)
SEO_HYPOTHESIS = (
    "okay so this morning i took him outside for a walk along the river and he kept stopping every few "
    "steps to sniff the grass then suddenly he spotted a duck floating near the bank and started running "
    "in circles barking like crazy i had no idea what was going on honestly it took me ages to calm him "
    "down after that we went home had some breakfast and he fell asleep on the sofa for the whole "
    "afternoon which is pretty normal for him really he loves his naps more than anything else in the "
    "world except maybe the park on a sunny weekend when all his friends are there playing with the ball"
)

# Captions that narrate the picture while the soundtrack is only animal noise.
DESCRIPTIVE_ID = "4Co4mDeCIJ4"
DESCRIPTIVE_CAPTION = (
    "A grey kitten wakes up in a basket by the window. She stretches, looks around the room "
    "and jumps down onto the rug."
)
DESCRIPTIVE_HYPOTHESIS = " ".join(["meow"] * 60 + ["purr"] * 30 + ["mrrp"] * 30)


def seeded(*parts):
    digest = hashlib.sha256("/".join(parts).encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def sentence(rng, topic_words):
    words = [rng.choice(SUBJECTS)]
    if rng.random() < 0.3:
        words += [rng.choice(["will", "can", "should"])]
    words += [rng.choice(VERBS), "the", rng.choice(ADJECTIVES), rng.choice(topic_words)]
    if rng.random() < 0.6:
        words += [rng.choice(LINKS), rng.choice(SUBJECTS), rng.choice(VERBS), "it", rng.choice(ADVERBS)]
    if rng.random() < 0.25:
        words = rng.choice(list(CONTRACT)).split() + words
    text = " ".join(words)
    return text[0].upper() + text[1:] + rng.choice([".", ".", "!", "?"])


def caption_text(video_id, category):
    rng = seeded("caption", video_id)
    topic = TOPICS[category]
    sentences = [sentence(rng, topic) for _ in range(rng.randint(6, 12))]
    if rng.random() < 0.3:
        sentences.insert(rng.randrange(len(sentences) + 1), rng.choice(["[Applause]", "(laughs)", "[Music]"]))
    return sentences


def recognise(reference_sentences, video_id, engine, error_rate, category):
    """What an imperfect recogniser might print for the reference."""
    rng = seeded("hypothesis", engine, video_id)
    text = " ".join(s for s in reference_sentences if not s.startswith(("[", "(")))
    for phrase, short in CONTRACT.items():
        if rng.random() < 0.5:
            text = text.replace(phrase, short).replace(phrase.capitalize(), short.capitalize())
    text = text.lower()
    tokens = [t.strip(".!?,") for t in text.split()]
    vocab = TOPICS[category] + ADJECTIVES + ADVERBS
    out = []
    for t in tokens:
        t = VARIANTS.get(t, t) if rng.random() < 0.5 else t
        r = rng.random()
        if r < error_rate:
            out.append(rng.choice(vocab))
        elif r < error_rate * 1.7:
            continue
        else:
            out.append(t)
        if rng.random() < error_rate * 0.6:
            out.append(rng.choice(vocab))
        if rng.random() < 0.02:
            out.append(rng.choice(FILLERS))
    return " ".join(out)


def segments(sentences, rng):
    segs, clock = [], 0.0
    for s in sentences:
        words = s.split()
        for i in range(0, len(words), 7):
            chunk = " ".join(words[i:i + 7])
            duration = round(0.4 * len(chunk.split()) + rng.random(), 3)
            segs.append({"start": round(clock, 3), "duration": duration, "text": chunk})
            clock += duration
    return segs


def wav_bytes(video_id, seconds=1, rate=100):
    rng = seeded("audio", video_id)
    samples = bytes(128 + rng.randint(-40, 40) for _ in range(seconds * rate))
    header = b"RIFF" + struct.pack("<I", 36 + len(samples)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, rate, rate, 1, 8)
    header += b"data" + struct.pack("<I", len(samples))
    return header + samples


def write_json(path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")


def main():
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "fixtures"
    root.mkdir(parents=True, exist_ok=True)
    transcripts = {"mock": {}, "mock-tiny": {}}
    rank = 0
    for category_id, category, ids in CATEGORIES:
        for n, video_id in enumerate(ids, start=1):
            rank += 1
            rng = seeded("meta", video_id)
            d = root / video_id
            d.mkdir(exist_ok=True)
            write_json(d / "meta.json", {
                "video_id": video_id,
                "title": f"{category} sample {n}",
                "category_id": category_id,
                "category_name": category,
                "duration_seconds": rng.randint(45, 1500),
                "language": "en",
                "search_rank": rank,
            })
            if video_id == SEO_ID:
                sentences = [SEO_CAPTION]
                hyps = {"mock": SEO_HYPOTHESIS, "mock-tiny": SEO_HYPOTHESIS}
            elif video_id == DESCRIPTIVE_ID:
                sentences = [DESCRIPTIVE_CAPTION]
                hyps = {"mock": DESCRIPTIVE_HYPOTHESIS, "mock-tiny": DESCRIPTIVE_HYPOTHESIS}
            else:
                sentences = caption_text(video_id, category)
                hyps = {"mock": recognise(sentences, video_id, "mock", 0.04, category),
                        "mock-tiny": recognise(sentences, video_id, "mock-tiny", 0.15, category)}
            write_json(d / "captions.json", {"tracks": [
                {"language": "en", "is_auto_generated": False, "segments": segments(sentences, rng)},
                {"language": "en", "is_auto_generated": True,
                 "segments": [{"start": 0.0, "duration": 1.0, "text": hyps["mock"]}]},
            ]})
            (d / "audio.wav").write_bytes(wav_bytes(video_id))
            for engine, text in hyps.items():
                transcripts[engine][video_id] = text
    write_json(root / "mock_transcripts.json", transcripts["mock"])
    write_json(root / "mock_tiny_transcripts.json", transcripts["mock-tiny"])
    write_json(root / "engines.json", [
        {"label": "mock", "kind": "mock", "endpoint_or_command": "mock_transcripts.json", "timeout_seconds": 60},
        {"label": "mock-tiny", "kind": "mock", "endpoint_or_command": "mock_tiny_transcripts.json",
         "timeout_seconds": 60},
    ])


if __name__ == "__main__":
    main()
