"""English word stemmers: the classic Porter algorithm and the Snowball
(Porter2) revision.

Both are implemented from their published rule sets. :func:`porter_stem`
follows the original 1980 definition (longest-suffix match per step,
condition checked afterwards, no later extensions). :func:`snowball_stem`
implements the Snowball English stemmer with its exception lists and
R1/R2 regions. :func:`stem_token` applies the package-wide policy: Porter
first, falling back to Snowball only when Porter leaves the token
unchanged and Snowball does not.

Inputs are assumed lowercase; callers tokenize and lowercase upstream.
"""

from __future__ import annotations

# ---------------------------------------------------------------------------
# Porter (1980)
# ---------------------------------------------------------------------------

_PORTER_VOWELS = "aeiou"


def _p_is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _PORTER_VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _p_is_cons(word, i - 1)
    return True


def _p_measure(stem: str) -> int:
    # number of VC sequences in the [C](VC)^m[V] decomposition
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        vowel = not _p_is_cons(stem, i)
        if prev_vowel and not vowel:
            m += 1
        prev_vowel = vowel
    return m


def _p_has_vowel(stem: str) -> bool:
    return any(not _p_is_cons(stem, i) for i in range(len(stem)))


def _p_double_cons(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _p_is_cons(word, len(word) - 1)


def _p_cvc(stem: str) -> bool:
    # ends consonant-vowel-consonant, final consonant not w, x or y
    if len(stem) < 3:
        return False
    return (
        _p_is_cons(stem, len(stem) - 3)
        and not _p_is_cons(stem, len(stem) - 2)
        and _p_is_cons(stem, len(stem) - 1)
        and stem[-1] not in "wxy"
    )


def _longest_rule(word: str, rules) -> tuple[str, str] | None:
    """Pick the rule whose suffix is the longest match; only that rule applies."""
    best = None
    for suffix, repl in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    return best


_P_STEP2 = [
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
]

_P_STEP3 = [
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
]

_P_STEP4 = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def porter_stem(word: str) -> str:
    if len(word) <= 2:
        return word

    # step 1a
    hit = _longest_rule(word, [("sses", "ss"), ("ies", "i"), ("ss", "ss"), ("s", "")])
    if hit:
        word = word[: len(word) - len(hit[0])] + hit[1]

    # step 1b
    if word.endswith("eed"):
        stem = word[:-3]
        if _p_measure(stem) > 0:
            word = stem + "ee"
    else:
        cleanup = False
        if word.endswith("ed") and _p_has_vowel(word[:-2]):
            word = word[:-2]
            cleanup = True
        elif word.endswith("ing") and _p_has_vowel(word[:-3]):
            word = word[:-3]
            cleanup = True
        if cleanup:
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _p_double_cons(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _p_measure(word) == 1 and _p_cvc(word):
                word += "e"

    # step 1c
    if word.endswith("y") and _p_has_vowel(word[:-1]):
        word = word[:-1] + "i"

    # step 2
    hit = _longest_rule(word, _P_STEP2)
    if hit and _p_measure(word[: len(word) - len(hit[0])]) > 0:
        word = word[: len(word) - len(hit[0])] + hit[1]

    # step 3
    hit = _longest_rule(word, _P_STEP3)
    if hit and _p_measure(word[: len(word) - len(hit[0])]) > 0:
        word = word[: len(word) - len(hit[0])] + hit[1]

    # step 4
    hit = _longest_rule(word, [(s, "") for s in _P_STEP4])
    if hit:
        stem = word[: len(word) - len(hit[0])]
        if _p_measure(stem) > 1 and (hit[0] != "ion" or (stem and stem[-1] in "st")):
            word = stem

    # step 5a
    if word.endswith("e"):
        stem = word[:-1]
        m = _p_measure(stem)
        if m > 1 or (m == 1 and not _p_cvc(stem)):
            word = stem

    # step 5b
    if _p_measure(word) > 1 and _p_double_cons(word) and word.endswith("l"):
        word = word[:-1]

    return word


# ---------------------------------------------------------------------------
# Snowball English (Porter2)
# ---------------------------------------------------------------------------

_SB_VOWELS = "aeiouy"  # marked consonant-y is uppercase and never matches
_SB_DOUBLES = ("bb", "dd", "ff", "gg", "mm", "nn", "pp", "rr", "tt")
_SB_LI_ENDING = "cdeghkmnrt"

_SB_EXCEPTIONS = {
    "skis": "ski", "skies": "sky", "dying": "die", "lying": "lie",
    "tying": "tie", "idly": "idl", "gently": "gentl", "ugly": "ugli",
    "early": "earli", "only": "onli", "singly": "singl",
    "sky": "sky", "news": "news", "howe": "howe", "atlas": "atlas",
    "cosmos": "cosmos", "bias": "bias", "andes": "andes",
}

_SB_EXCEPTIONS_POST1A = frozenset(
    ["inning", "outing", "canning", "herring", "earring", "proceed", "exceed", "succeed"]
)

_SB_STEP2 = [
    ("ization", "ize"), ("ational", "ate"), ("fulness", "ful"),
    ("ousness", "ous"), ("iveness", "ive"), ("tional", "tion"),
    ("biliti", "ble"), ("lessli", "less"), ("entli", "ent"), ("ation", "ate"),
    ("alism", "al"), ("aliti", "al"), ("ousli", "ous"), ("iviti", "ive"),
    ("fulli", "ful"), ("enci", "ence"), ("anci", "ance"), ("abli", "able"),
    ("izer", "ize"), ("ator", "ate"), ("alli", "al"), ("bli", "ble"),
    ("ogi", "og"), ("li", ""),
]

_SB_STEP3 = [
    ("ational", "ate"), ("tional", "tion"), ("alize", "al"), ("icate", "ic"),
    ("iciti", "ic"), ("ative", ""), ("ical", "ic"), ("ness", ""), ("ful", ""),
]

_SB_STEP4 = [
    "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism",
    "ate", "iti", "ous", "ive", "ize", "ion", "al", "er", "ic",
]


def _sb_mark_y(word: str) -> str:
    chars = list(word)
    if chars and chars[0] == "y":
        chars[0] = "Y"
    for i in range(1, len(chars)):
        if chars[i] == "y" and chars[i - 1] in _SB_VOWELS:
            chars[i] = "Y"
    return "".join(chars)


def _sb_region_after(word: str, start: int) -> int:
    # index after the first non-vowel that follows a vowel, scanning from start
    n = len(word)
    i = start
    while i < n and word[i] not in _SB_VOWELS:
        i += 1
    while i < n and word[i] in _SB_VOWELS:
        i += 1
    return min(i + 1, n) if i < n else n


def _sb_r1(word: str) -> int:
    for prefix in ("gener", "commun", "arsen"):
        if word.startswith(prefix):
            return len(prefix)
    return _sb_region_after(word, 0)


def _sb_ends_short_syllable(word: str) -> bool:
    n = len(word)
    if n == 2:
        return word[0] in _SB_VOWELS and word[1] not in _SB_VOWELS
    if n >= 3:
        return (
            word[-3] not in _SB_VOWELS
            and word[-2] in _SB_VOWELS
            and word[-1] not in _SB_VOWELS
            and word[-1] not in "wxY"
        )
    return False


def _sb_is_short(word: str, r1: int) -> bool:
    return r1 >= len(word) and _sb_ends_short_syllable(word)


def snowball_stem(word: str) -> str:
    if len(word) <= 2:
        return word
    if word.startswith("'"):
        word = word[1:]
    if word in _SB_EXCEPTIONS:
        return _SB_EXCEPTIONS[word]

    word = _sb_mark_y(word)
    r1 = _sb_r1(word)
    r2 = _sb_region_after(word, r1)

    def in_r1(suffix: str) -> bool:
        return len(word) - len(suffix) >= r1

    def in_r2(suffix: str) -> bool:
        return len(word) - len(suffix) >= r2

    # step 0: possessives
    for suffix in ("'s'", "'s", "'"):
        if word.endswith(suffix):
            word = word[: len(word) - len(suffix)]
            break

    # step 1a
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith(("ied", "ies")):
        word = word[:-2] if len(word) > 4 else word[:-1]
    elif word.endswith(("us", "ss")):
        pass
    elif word.endswith("s"):
        if any(ch in _SB_VOWELS for ch in word[:-2]):
            word = word[:-1]

    if word in _SB_EXCEPTIONS_POST1A:
        return word.replace("Y", "y")

    # step 1b
    hit = _longest_rule(word, [("eedly", ""), ("eed", ""), ("edly", ""), ("ed", ""), ("ingly", ""), ("ing", "")])
    if hit:
        suffix = hit[0]
        if suffix in ("eed", "eedly"):
            if in_r1(suffix):
                word = word[: len(word) - len(suffix)] + "ee"
        else:
            stem = word[: len(word) - len(suffix)]
            if any(ch in _SB_VOWELS for ch in stem):
                word = stem
                if word.endswith(("at", "bl", "iz")):
                    word += "e"
                elif word.endswith(_SB_DOUBLES):
                    word = word[:-1]
                elif _sb_is_short(word, r1):
                    word += "e"

    # step 1c
    if len(word) > 2 and word[-1] in "yY" and word[-2] not in _SB_VOWELS:
        word = word[:-1] + "i"

    # step 2
    hit = _longest_rule(word, _SB_STEP2)
    if hit and in_r1(hit[0]):
        suffix, repl = hit
        stem = word[: len(word) - len(suffix)]
        if suffix == "ogi":
            if stem.endswith("l"):
                word = stem + repl
        elif suffix == "li":
            if stem and stem[-1] in _SB_LI_ENDING:
                word = stem
        else:
            word = stem + repl

    # step 3
    hit = _longest_rule(word, _SB_STEP3)
    if hit and in_r1(hit[0]):
        suffix, repl = hit
        if suffix == "ative":
            if in_r2(suffix):
                word = word[: len(word) - len(suffix)]
        else:
            word = word[: len(word) - len(suffix)] + repl

    # step 4
    hit = _longest_rule(word, [(s, "") for s in _SB_STEP4])
    if hit and in_r2(hit[0]):
        suffix = hit[0]
        stem = word[: len(word) - len(suffix)]
        if suffix != "ion" or (stem and stem[-1] in "st"):
            word = stem

    # step 5
    if word.endswith("e"):
        if in_r2("e") or (in_r1("e") and not _sb_ends_short_syllable(word[:-1])):
            word = word[:-1]
    elif word.endswith("l"):
        if in_r2("l") and len(word) >= 2 and word[-2] == "l":
            word = word[:-1]

    return word.replace("Y", "y")


def stem_token(token: str) -> str:
    """Porter stem, with Snowball as fallback when Porter makes no change."""
    stemmed = porter_stem(token)
    if stemmed != token:
        return stemmed
    alt = snowball_stem(token)
    return alt if alt != token else token
