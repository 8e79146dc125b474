#!/usr/bin/env python3
"""Regenerates tests/fixtures/web3: a 3-class mining fixture plus the
embedding dumps, labels and pipeline config the end-to-end run consumes.

Run from anywhere: python3 tests/fixtures/make_fixtures.py
Output is deterministic; commit the result.
"""

import json
import math
import random
import shutil
import struct
from pathlib import Path

ROOT = Path(__file__).resolve().parent / "web3"
FETCHED_AT = "2024-05-01T12:00:00Z"
HOST = "https://derm.example.org"
CDN = "https://cdn.example.org"

CLASSES = [
    {"id": "melanoma", "display_name": "melanoma"},
    {"id": "psoriasis", "display_name": "psoriasis"},
    {"id": "acne", "display_name": "acne vulgaris"},
]
PSEUDO = {
    "melanoma": "dark irregular skin lesion",
    "psoriasis": "red scaly skin plaque",
    "acne": "inflamed skin pimples",
}
WORDS = {
    "melanoma": ["melanoma", "mole", "pigmented", "lesion", "asymmetric", "border"],
    "psoriasis": ["psoriasis", "plaque", "scaly", "silvery", "elbow", "flare"],
    "acne": ["acne", "vulgaris", "pimples", "comedones", "pustules", "teen"],
}
FILLER = ("the clinic reviewed the case during a routine visit and documented the findings "
          "for the patient record with follow up scheduled in spring").split()

PER_CLASS_RESULTS = 18
TEXT_DIM = 64
CLF_DIM = 32
N_TEST = 150
N_ORACLE = 60


def fnv1a64(token: str) -> int:
    h = 0xCBF29CE484222325
    for b in token.encode():
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def hashing_embedding(text: str, dim: int) -> list:
    v = [0.0] * dim
    token = ""
    for ch in text + " ":
        if ch.isascii() and ch.isalnum():
            token += ch.lower()
        elif token:
            h = fnv1a64(token)
            v[h % dim] += -1.0 if h >> 63 else 1.0
            token = ""
    if not any(v):
        v[0] = 1.0
    return v


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def write_wcpe(path: Path, ids, rows, dim):
    out = bytearray(b"WCPEMB01")
    out += struct.pack("<IQ", dim, len(ids))
    for i in ids:
        b = i.encode()
        out += struct.pack("<H", len(b)) + b
    for r in rows:
        out += struct.pack("<%df" % dim, *r)
    path.write_bytes(bytes(out))


def sentence(rng, cls, n_words=9):
    words = [rng.choice(FILLER) for _ in range(n_words)]
    words.insert(rng.randrange(len(words)), rng.choice(WORDS[cls]))
    return " ".join(words).capitalize() + "."


def page(title, before, img_tag, after):
    return (
        "<!DOCTYPE html>\n<html><head><title>%s</title>\n"
        "<script>var tracker = {id: 7};</script><style>p{margin:0}</style></head>\n"
        "<body><nav><a href=\"/\">Home</a> | <a href=\"/atlas\">Atlas</a></nav>\n"
        "<article>\n%s\n<figure>%s</figure>\n%s\n</article>\n"
        "<footer>&copy; 2024 Derm Atlas &mdash; all rights reserved</footer></body></html>\n"
    ) % (title, before, img_tag, after)


def paragraphs(sentences):
    return "\n".join("<p>%s</p>" % s for s in sentences)


def main():
    rng = random.Random(20240501)
    if ROOT.exists():
        shutil.rmtree(ROOT)
    (ROOT / "search").mkdir(parents=True)
    (ROOT / "web" / "pages").mkdir(parents=True)
    (ROOT / "web" / "images").mkdir(parents=True)

    resources = {}
    truth = {}  # example id -> true class or None for junk
    for cls in CLASSES:
        cid = cls["id"]
        results = []
        for rank in range(1, PER_CLASS_RESULTS + 1):
            slug = "%s-%02d" % (cid, rank)
            page_url = "%s/atlas/%s/case-%02d.html" % (HOST, cid, rank)
            image_name = "IMG_%s_%02d.jpg" % (cid.capitalize(), rank)
            image_url = "%s/photos/%s" % (CDN, image_name.lower())
            results.append({"image_url": image_url, "context_url": page_url, "rank": rank})

            true_cls = cid
            alt = "Clinical photograph of %s on the forearm" % cls["display_name"]
            before = [sentence(rng, cid) for _ in range(rng.randint(2, 4))]
            after = [sentence(rng, cid) for _ in range(rng.randint(2, 4))]
            src = "%s?w=640" % image_name
            img_tag = '<img src="%s" alt="%s" width="640">' % (src, alt)
            status = "ok"

            if rank == 2:
                status = "timeout"
            elif rank == 4:
                # One 500-token sentence before the image.
                before = [" ".join(rng.choice(FILLER + WORDS[cid]) for _ in range(500)) + "."]
            elif rank == 5:
                img_tag = '<img src="%s" width="640">' % src  # missing alt
            elif rank == 6:
                after = [sentence(rng, cid, 6) for _ in range(15)]
            elif rank == 7:
                img_tag = ('<img src="data:image/gif;base64,R0lGODlhAQABAAAAACw=" '
                           'url-src="%s" alt="%s">' % (src, alt))
            elif rank == 8 and cid == "melanoma":
                # Mislabelled: the page is about psoriasis.
                true_cls = "psoriasis"
                alt = "Psoriasis plaque with silvery scale"
                before = [sentence(rng, "psoriasis") for _ in range(3)]
                after = [sentence(rng, "psoriasis") for _ in range(2)]
                img_tag = '<img src="%s" alt="%s">' % (src, alt)
            elif rank == 9:
                status = "not_found"
            elif rank == 11:
                img_tag = '<img src="banner_%02d.png" alt="Clinic banner">' % rank
            elif rank == 13:
                true_cls = None  # junk: a chart, not a photograph
                alt = "Bar chart of %s incidence statistics by age" % cls["display_name"]
                before = ["The graph below shows yearly incidence figures."]
                after = ["Source: registry data, a chart compiled by the editors."]
                img_tag = '<img src="%s" alt="%s">' % (src, alt)
            elif rank == 15:
                status = "blocked"

            if status == "ok":
                html = page("%s case %d" % (cls["display_name"], rank), paragraphs(before), img_tag,
                            paragraphs(after))
                (ROOT / "web" / "pages" / (slug + ".html")).write_text(html)
                resources[page_url] = {"file": "pages/%s.html" % slug, "content_type": "text/html"}
                payload = b"\xff\xd8\xff\xe0" + ("fixture image %s" % slug).encode() + b"\xff\xd9"
                (ROOT / "web" / "images" / (slug + ".jpg")).write_bytes(payload)
                resources[image_url] = {"file": "images/%s.jpg" % slug, "content_type": "image/jpeg"}
            else:
                resources[page_url] = {"status": status}
            truth["%s-%04d" % (cid, rank)] = true_cls

        # Duplicate of rank 3 at a worse rank; dedup keeps rank 3.
        results.append(dict(results[2], rank=PER_CLASS_RESULTS + 1))
        rng.shuffle(results)
        (ROOT / "search" / (cid + ".json")).write_text(json.dumps(results, indent=1) + "\n")

    (ROOT / "web" / "fetch_index.json").write_text(
        json.dumps({"fetched_at": FETCHED_AT, "resources": resources}, indent=1, sort_keys=True) + "\n")
    (ROOT / "classes.json").write_text(json.dumps(CLASSES, indent=1) + "\n")
    (ROOT / "pseudo_labels.json").write_text(json.dumps(PSEUDO, indent=1, sort_keys=True) + "\n")

    # Content-encoder image embeddings in the hashing text space.
    emb_rng = random.Random(7)
    ids = sorted(truth)
    rows = []
    for eid in ids:
        anchor = PSEUDO[truth[eid]] + " an image" if truth[eid] else "a chart"
        base = unit(hashing_embedding(anchor, TEXT_DIM))
        rows.append([b + 0.35 * emb_rng.gauss(0, 1) / math.sqrt(TEXT_DIM) for b in base])
    write_wcpe(ROOT / "content_images.wcpe", ids, rows, TEXT_DIM)

    # Classifier space: Gaussian clusters around unit centers.
    centers = {c["id"]: unit([emb_rng.gauss(0, 1) for _ in range(CLF_DIM)]) for c in CLASSES}
    class_ids = [c["id"] for c in CLASSES]

    def clf_image(cls, scale):
        return [x + scale * emb_rng.gauss(0, 1) / math.sqrt(CLF_DIM) for x in centers[cls]]

    clf_ids, clf_rows = [], []
    for eid in ids:
        cls = truth[eid] or eid.split("-")[0]
        clf_ids.append(eid)
        clf_rows.append(clf_image(cls, 0.6 if truth[eid] else 1.5))
    test, oracle = [], []
    for prefix, n, out in (("test", N_TEST, test), ("oracle", N_ORACLE, oracle)):
        for i in range(n):
            cls = class_ids[i % len(class_ids)]
            eid = "%s-%04d" % (prefix, i)
            clf_ids.append(eid)
            clf_rows.append(clf_image(cls, 0.6))
            out.append({"example_id": eid, "label": cls})
    write_wcpe(ROOT / "classifier_images.wcpe", clf_ids, clf_rows, CLF_DIM)
    write_wcpe(ROOT / "classifier_labels.wcpe", class_ids, [centers[c] for c in class_ids], CLF_DIM)
    for name, rows_ in (("test_labels.jsonl", test), ("oracle_labels.jsonl", oracle)):
        (ROOT / name).write_text("".join(json.dumps(r) + "\n" for r in rows_))
    (ROOT / "web_truth.json").write_text(json.dumps(truth, indent=1, sort_keys=True) + "\n")

    config = {
        "task_name": "derm3",
        "classes": "classes.json",
        "query_template": "An image of <category>",
        "prompt_template": "An image of <category>",
        "per_class": 10,
        "temperatures": {"ctx": 0.07, "filter": 0.07, "content": 0.07, "clf": 0.1},
        "pseudo_labels": "pseudo_labels.json",
        "alpha": 0.1,
        "mc_samples": 100,
        "seed": 0,
        "method": "webcp",
        "threads": 2,
        "stages": ["mine", "embed", "plausibility", "calibrate", "predict", "evaluate"],
        "paths": {
            "output": "out",
            "content_images": "content_images.wcpe",
            "classifier_images": "classifier_images.wcpe",
            "classifier_labels": "classifier_labels.wcpe",
            "test_labels": "test_labels.jsonl",
            "oracle_labels": "oracle_labels.jsonl",
        },
        "providers": {
            "search": {"kind": "fixture", "location": "search"},
            "fetch": {"kind": "fixture", "location": "web"},
            "text": {"kind": "hashing", "dim": TEXT_DIM},
        },
    }
    (ROOT / "pipeline.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
