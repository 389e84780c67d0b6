"""Porter suffix-stripping stemmer (original 1980 algorithm).

Pure-Python, no data files. Within each step only the rule with the
longest matching suffix is attempted; if its condition fails on the stem,
the step is a no-op (this matters: "feed" must not lose its "ed").
"""
from __future__ import annotations

_VOWELS = "aeiou"


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        # y is a vowel when preceded by a consonant, a consonant otherwise
        return True if i == 0 else not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel->consonant transitions: m in [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _is_cons(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _ends_double_cons(stem: str) -> bool:
    return len(stem) >= 2 and stem[-1] == stem[-2] and _is_cons(stem, len(stem) - 1)


def _ends_cvc(stem: str) -> bool:
    # the *o condition: final cvc where the last consonant is not w, x or y
    if len(stem) < 3:
        return False
    n = len(stem)
    return (
        _is_cons(stem, n - 3)
        and not _is_cons(stem, n - 2)
        and _is_cons(stem, n - 1)
        and stem[-1] not in "wxy"
    )


def _longest_rule(word: str, rules):
    """Pick the rule whose suffix is the longest match; None if nothing matches."""
    best = None
    for suffix, repl, cond in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl, cond)
    return best


def _apply(word: str, rules) -> str:
    hit = _longest_rule(word, rules)
    if hit is None:
        return word
    suffix, repl, cond = hit
    stem = word[: len(word) - len(suffix)]
    if cond is None or cond(stem):
        return stem + repl
    return word


_STEP2 = [
    ("ational", "ate", None), ("tional", "tion", None), ("enci", "ence", None),
    ("anci", "ance", None), ("izer", "ize", None), ("abli", "able", None),
    ("alli", "al", None), ("entli", "ent", None), ("eli", "e", None),
    ("ousli", "ous", None), ("ization", "ize", None), ("ation", "ate", None),
    ("ator", "ate", None), ("alism", "al", None), ("iveness", "ive", None),
    ("fulness", "ful", None), ("ousness", "ous", None), ("aliti", "al", None),
    ("iviti", "ive", None), ("biliti", "ble", None),
]

_STEP3 = [
    ("icate", "ic", None), ("ative", "", None), ("alize", "al", None),
    ("iciti", "ic", None), ("ical", "ic", None), ("ful", "", None),
    ("ness", "", None),
]

_STEP4 = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def porter_stem(word: str) -> str:
    w = word

    # Step 1a
    w = _apply(w, [("sses", "ss", None), ("ies", "i", None),
                   ("ss", "ss", None), ("s", "", None)])

    # Step 1b
    hit = _longest_rule(w, [("eed", None, None), ("ed", None, None), ("ing", None, None)])
    if hit is not None:
        suffix = hit[0]
        stem = w[: len(w) - len(suffix)]
        if suffix == "eed":
            if _measure(stem) > 0:
                w = stem + "ee"
        elif _has_vowel(stem):
            w = stem
            # cleanup after a successful ed/ing removal
            if w.endswith(("at", "bl", "iz")):
                w += "e"
            elif _ends_double_cons(w) and w[-1] not in "lsz":
                w = w[:-1]
            elif _measure(w) == 1 and _ends_cvc(w):
                w += "e"

    # Step 1c
    if w.endswith("y") and _has_vowel(w[:-1]):
        w = w[:-1] + "i"

    # Steps 2 and 3: condition m(stem) > 0 throughout
    w = _apply(w, [(s, r, lambda st: _measure(st) > 0) for s, r, _ in _STEP2])
    w = _apply(w, [(s, r, lambda st: _measure(st) > 0) for s, r, _ in _STEP3])

    # Step 4: strip residual suffixes from long stems
    hit = _longest_rule(w, [(s, "", None) for s in _STEP4])
    if hit is not None:
        suffix = hit[0]
        stem = w[: len(w) - len(suffix)]
        ok = _measure(stem) > 1
        if suffix == "ion":
            ok = ok and stem.endswith(("s", "t"))
        if ok:
            w = stem

    # Step 5a
    if w.endswith("e"):
        stem = w[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            w = stem

    # Step 5b
    if _measure(w) > 1 and _ends_double_cons(w) and w.endswith("l"):
        w = w[:-1]

    return w
