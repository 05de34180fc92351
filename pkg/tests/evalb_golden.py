"""Hand-scored evalb cases (COLLINS.prm semantics).

Each entry: name, gold tree(s), predicted tree(s), expected
(matched, gold brackets, test brackets, LR, LP, F1). Counts were taken by
hand: preterminals are not brackets; the words of ``` '' : , .`` and
-NONE- preterminals are dropped before span boundaries are computed;
brackets covering no words and TOP/ROOT/-NONE- labels are dropped;
ADVP and PRT are one label; matching is by multiset.
"""

GOLDEN = [
    ("identical", ["(S (NP (DT The) (NN cat)) (VP (VBD sat)))"],
     ["(S (NP (DT The) (NN cat)) (VP (VBD sat)))"], (3, 3, 3, 100.00, 100.00, 100.00)),
    ("one spurious bracket", ["(S (NP (DT The) (NN cat)) (VP (VBD sat)))"],
     ["(S (X (NP (DT The) (NN cat))) (VP (VBD sat)))"], (3, 3, 4, 100.00, 75.00, 85.71)),
    ("crossing halves", ["(S (DT a) (VP (NN b) (VBD c)))"],
     ["(S (NP (DT a) (NN b)) (VBD c))"], (1, 2, 2, 50.00, 50.00, 50.00)),
    ("unary chain kept", ["(S (VP (VB go)))"], ["(S (VP (VB go)))"], (2, 2, 2, 100.00, 100.00, 100.00)),
    ("unary chain missing inner", ["(S (VP (VB go)))"], ["(S (VB go))"], (1, 2, 1, 50.00, 100.00, 66.67)),
    ("unary chain wrong inner", ["(S (VP (VB go)))"], ["(S (NP (VB go)))"], (1, 2, 2, 50.00, 50.00, 50.00)),
    ("length one", ["(NP (NN dog))"], ["(NP (NN dog))"], (1, 1, 1, 100.00, 100.00, 100.00)),
    ("length one wrong label", ["(NP (NN dog))"], ["(VP (NN dog))"], (0, 1, 1, 0.00, 0.00, 0.00)),
    ("final period attachment ignored", ["(S (NP (PRP He)) (VP (VBD left)) (. .))"],
     ["(S (NP (PRP He)) (VP (VBD left) (. .)))"], (3, 3, 3, 100.00, 100.00, 100.00)),
    ("punctuation-only bracket dropped", ["(S (NP (PRP He)) (VP (VBD left)) (. .))"],
     ["(S (NP (PRP He)) (VP (VBD left)) (X (. .)))"], (3, 3, 3, 100.00, 100.00, 100.00)),
    ("comma split", ["(S (NP (NNP John) (, ,) (NNP Mary)) (VP (VBD ran)))"],
     ["(S (NP (NNP John)) (, ,) (NP (NNP Mary)) (VP (VBD ran)))"], (2, 3, 4, 66.67, 50.00, 57.14)),
    ("ADVP equals PRT", ["(S (NP (PRP He)) (VP (VBD gave) (PRT (RP up))))"],
     ["(S (NP (PRP He)) (VP (VBD gave) (ADVP (RP up))))"], (4, 4, 4, 100.00, 100.00, 100.00)),
    ("TOP deleted", ["(TOP (S (NP (PRP I)) (VP (VBP run))))"],
     ["(S (NP (PRP I)) (VP (VBP run)))"], (3, 3, 3, 100.00, 100.00, 100.00)),
    ("trace removed", ["(S (NP (-NONE- *)) (VP (VBD ran)))"],
     ["(S (VP (VBD ran)))"], (2, 2, 2, 100.00, 100.00, 100.00)),
    ("gold duplicate bracket", ["(S (NP (NP (DT the) (NN dog))) (VP (VBD ran)))"],
     ["(S (NP (DT the) (NN dog)) (VP (VBD ran)))"], (3, 4, 3, 75.00, 100.00, 85.71)),
    ("predicted duplicate bracket", ["(S (NP (DT the) (NN dog)) (VP (VBD ran)))"],
     ["(S (NP (NP (DT the) (NN dog))) (VP (VBD ran)))"], (3, 3, 4, 100.00, 75.00, 85.71)),
    ("different structure", ["(S (NP (DT a) (NN b)) (VP (VBD c) (NP (NN d))))"],
     ["(S (X (DT a)) (Y (NN b) (VBD c)) (Z (NN d)))"], (1, 4, 4, 25.00, 25.00, 25.00)),
    ("flat prediction", ["(S (NP (DT a) (NN b)) (VP (VBD c) (NP (NN d))))"],
     ["(S (DT a) (NN b) (VBD c) (NN d))"], (1, 4, 1, 25.00, 100.00, 40.00)),
    ("labels swapped", ["(S (NP (DT a) (NN b)) (VP (VBD c)))"],
     ["(S (VP (DT a) (NN b)) (NP (VBD c)))"], (1, 3, 3, 33.33, 33.33, 33.33)),
    ("nothing matches", ["(NP (DT a) (NN b))"], ["(VP (DT a) (NN b))"], (0, 1, 1, 0.00, 0.00, 0.00)),
    ("quotes ignored", ["(S (`` ``) (NP (PRP I)) (VP (VBD won)) ('' ''))"],
     ["(S (`` ``) (NP (PRP I)) (VP (VBD won) ('' '')))"], (3, 3, 3, 100.00, 100.00, 100.00)),
    ("colon ignored", ["(S (NP (NN a)) (: ;) (NP (NN b)))"],
     ["(S (NP (NN a) (: ;)) (NP (NN b)))"], (3, 3, 3, 100.00, 100.00, 100.00)),
    ("SYM is a word", ["(S (NP (SYM $)) (VP (VBD x)))"],
     ["(S (NP (SYM $) (VBD x)))"], (1, 3, 2, 33.33, 50.00, 40.00)),
    ("two-sentence micro average",
     ["(S (NP (DT The) (NN cat)) (VP (VBD sat)))", "(S (DT a) (VP (NN b) (VBD c)))"],
     ["(S (X (NP (DT The) (NN cat))) (VP (VBD sat)))", "(S (NP (DT a) (NN b)) (VBD c))"],
     (4, 5, 6, 80.00, 66.67, 72.73)),
]
