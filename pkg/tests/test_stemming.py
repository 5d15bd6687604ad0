from litmap.stemming import porter_stem, stable_stem

# Classic vectors from the published description of the algorithm.
VECTORS = {
    "caresses": "caress",
    "ponies": "poni",
    "ties": "ti",
    "caress": "caress",
    "cats": "cat",
    "feed": "feed",
    "agreed": "agre",
    "plastered": "plaster",
    "bled": "bled",
    "motoring": "motor",
    "sing": "sing",
    "conflated": "conflat",
    "troubled": "troubl",
    "sized": "size",
    "hopping": "hop",
    "tanned": "tan",
    "falling": "fall",
    "hissing": "hiss",
    "fizzed": "fizz",
    "failing": "fail",
    "filing": "file",
    "happy": "happi",
    "sky": "sky",
    "relational": "relat",
    "conditional": "condit",
    "rational": "ration",
    "triplicate": "triplic",
    "formative": "form",
    "formalize": "formal",
    "electrical": "electr",
    "hopeful": "hope",
    "goodness": "good",
    "revival": "reviv",
    "allowance": "allow",
    "inference": "infer",
    "airliner": "airlin",
    "gyroscopic": "gyroscop",
    "adjustable": "adjust",
    "defensible": "defens",
    "irritant": "irrit",
    "replacement": "replac",
    "adjustment": "adjust",
    "dependent": "depend",
    "adoption": "adopt",
    "communism": "commun",
    "activate": "activ",
    "effective": "effect",
    "probate": "probat",
    "rate": "rate",
    "cease": "ceas",
    "controll": "control",
    "roll": "roll",
    # domain vocabulary
    "buildings": "build",
    "building": "build",
    "sustainability": "sustain",
    "energy": "energi",
    "assessment": "assess",
    "efficiency": "effici",
    "materials": "materi",
    "renewable": "renew",
    "insulation": "insul",
}


def test_classic_vectors():
    for word, expected in VECTORS.items():
        assert porter_stem(word) == expected, word


def test_short_words_unchanged():
    for word in ("a", "be", "of", "is"):
        assert porter_stem(word) == word


def test_stable_stem_is_fixed_point():
    for word in VECTORS:
        stem = stable_stem(word)
        assert stable_stem(stem) == stem
