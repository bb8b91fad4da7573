#!/usr/bin/env python3
"""Extract translated strings from gettext catalogs into corpus-format files.

Usage: extract_po_text.py OUT_DIR ROOT [ROOT ...]

Walks every ROOT for `locale/<code>/LC_MESSAGES/*.po`, keeps msgstr text for the
languages in LANGS, strips format placeholders and markup, deduplicates, and
writes `<tag>.txt` files with one "<tag>\t<text>" line per string.
"""
import glob
import os
import re
import sys

LANGS = {"de": "deu", "fr": "fra", "es": "spa", "it": "ita", "nl": "nld"}

STR = re.compile(r'"((?:[^"\\]|\\.)*)"')
MSGSTR = re.compile(r'^msgstr(?:\[\d+\])? ((?:"(?:[^"\\]|\\.)*"\s*)+)', re.M)
HEADER = re.compile(r"Project-Id-Version|Content-Type: text/plain")
PLACEHOLDER = re.compile(r"%\([^)]*\)[sdif]|%[sdif]|\{[^}]*\}|<[^>]*>|&\w+;|\[[^\]]*\]|https?://\S+")


def clean(s):
    s = s.replace('\\n', ' ').replace('\\t', ' ').replace('\\"', '"').replace("\\\\", "\\")
    s = PLACEHOLDER.sub(" ", s)
    s = re.sub(r"\s+", " ", s).strip()
    return s


def main():
    out, roots = sys.argv[1], sys.argv[2:]
    lines = {tag: [] for tag in LANGS.values()}
    for root in roots:
        for path in sorted(glob.glob(os.path.join(root, "**", "locale", "*", "LC_MESSAGES", "*.po"), recursive=True)):
            code = path.split(os.sep + "locale" + os.sep)[-1].split(os.sep)[0]
            tag = LANGS.get(code)
            if tag is None:
                continue
            text = open(path, encoding="utf-8").read()
            for block in MSGSTR.findall(text):
                s = clean("".join(STR.findall(block)))
                if HEADER.search(s):
                    continue
                if sum(ch.isalpha() for ch in s) >= 2:
                    lines[tag].append(s)
    for tag, items in lines.items():
        seen = set()
        with open(os.path.join(out, tag + ".txt"), "w", encoding="utf-8") as f:
            for s in items:
                if s not in seen:
                    seen.add(s)
                    f.write(f"{tag}\t{s}\n")


if __name__ == "__main__":
    main()
