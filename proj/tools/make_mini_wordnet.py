#!/usr/bin/env python3
"""Extract the bundled WordNet subset from a full WordNet 3.0 dict directory.

Keeps every synset of each lemma reachable from the seed files (whole phrases
and their single words), plus direct hyponym synsets of noun and verb senses.
Pointers are filtered to kept synsets and byte offsets are recomputed.

usage: make_mini_wordnet.py WORDNET_DICT_DIR OUT_DIR SEED_FILE...
"""

import re
import sys
from pathlib import Path

POS_FILES = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}
EXTRA_LEMMAS = ["dog"]


def file_pos(p):
    return "a" if p == "s" else p


def candidate_lemmas(seed_files):
    out = set(EXTRA_LEMMAS)
    for f in seed_files:
        for line in Path(f).read_text().splitlines():
            line = line.strip().lower()
            if not line or line.startswith("#"):
                continue
            words = re.findall(r"[a-z][a-z'-]*", line)
            out.add("_".join(words))
            for w in words:
                out.add(w)
                out.update(p for p in w.split("-") if p)
    return out


def read_header_and_lines(path):
    header, lines = [], []
    with open(path, encoding="latin-1", newline="") as fh:
        for line in fh:
            (header if line.startswith("  ") else lines).append(line)
    return header, lines


def parse_data_line(line):
    body, sep, gloss = line.partition(" | ")
    toks = body.split()
    off, lexfile, ss_type, wcnt = toks[0], toks[1], toks[2], int(toks[3], 16)
    i = 4
    words = toks[i : i + 2 * wcnt]
    i += 2 * wcnt
    pcnt = int(toks[i])
    i += 1
    ptrs = [tuple(toks[i + 4 * k : i + 4 * k + 4]) for k in range(pcnt)]
    i += 4 * pcnt
    rest = toks[i:]
    return {
        "off": off, "lexfile": lexfile, "type": ss_type, "words": words,
        "ptrs": ptrs, "rest": rest, "gloss": sep + gloss if sep else "\n",
    }


def main():
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    lemmas = candidate_lemmas(sys.argv[3:])

    index = {p: {} for p in POS_FILES}
    for p, name in POS_FILES.items():
        with open(src / f"index.{name}", encoding="latin-1") as fh:
            for line in fh:
                if line.startswith("  "):
                    continue
                t = line.split()
                lemma, scnt, pcnt = t[0], int(t[2]), int(t[3])
                index[p][lemma] = {
                    "ptr_syms": t[4 : 4 + pcnt],
                    "tagsense": int(t[5 + pcnt]),
                    "offs": t[6 + pcnt : 6 + pcnt + scnt],
                }

    data, headers = {}, {}
    for p, name in POS_FILES.items():
        headers[p], lines = read_header_and_lines(src / f"data.{name}")
        data[p] = {}
        for line in lines:
            rec = parse_data_line(line)
            data[p][rec["off"]] = rec

    keep = set()
    for lemma in lemmas:
        for p in POS_FILES:
            entry = index[p].get(lemma)
            if not entry:
                continue
            for off in entry["offs"]:
                keep.add((p, off))
                if p in ("n", "v"):
                    for sym, target, tpos, _ in data[p][off]["ptrs"]:
                        if sym == "~":
                            keep.add((file_pos(tpos), target))

    # First pass: filtered lines with old offsets (same width) to fix byte positions.
    new_off = {}
    rendered = {}
    for p in POS_FILES:
        pos_ = len("".join(headers[p]).encode("latin-1"))
        rendered[p] = []
        for off in sorted(o for (q, o) in keep if q == p):
            rec = data[p][off]
            ptrs = [x for x in rec["ptrs"] if (file_pos(x[2]), x[1]) in keep]
            rendered[p].append((off, rec, ptrs))
            new_off[(p, off)] = pos_
            pos_ += len(render(rec, off, ptrs, lambda q, o: o).encode("latin-1"))

    out.mkdir(parents=True, exist_ok=True)
    members = {p: {} for p in POS_FILES}
    for p, name in POS_FILES.items():
        with open(out / f"data.{name}", "w", encoding="latin-1", newline="") as fh:
            fh.write("".join(headers[p]))
            for off, rec, ptrs in rendered[p]:
                remap = lambda q, o: "%08d" % new_off[(file_pos(q), o)]
                fh.write(render(rec, "%08d" % new_off[(p, off)], ptrs, remap))
                for w in rec["words"][0::2]:
                    key = re.sub(r"\([a-z]+\)$", "", w).lower()
                    members[p].setdefault(key, set()).add(off)

    for p, name in POS_FILES.items():
        with open(out / f"index.{name}", "w", encoding="latin-1", newline="") as fh:
            fh.write("".join(headers[p]))
            for lemma in sorted(members[p]):
                entry = index[p][lemma]
                offs = [o for o in entry["offs"] if o in members[p][lemma]]
                syms = entry["ptr_syms"]
                fh.write(
                    f"{lemma} {p} {len(offs)} {len(syms)} "
                    + "".join(s + " " for s in syms)
                    + f"{len(offs)} {min(entry['tagsense'], len(offs))} "
                    + "".join("%08d " % new_off[(p, o)] for o in offs)
                    + " \n"
                )
    print(f"kept {len(keep)} synsets for {len(lemmas)} candidate lemmas", file=sys.stderr)


def render(rec, off, ptrs, remap):
    parts = [off, rec["lexfile"], rec["type"], "%02x" % (len(rec["words"]) // 2)]
    parts += rec["words"]
    parts.append("%03d" % len(ptrs))
    for sym, target, tpos, st in ptrs:
        parts += [sym, remap(tpos, target), tpos, st]
    parts += rec["rest"]
    return " ".join(parts) + rec["gloss"]


if __name__ == "__main__":
    main()
