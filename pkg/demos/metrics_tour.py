"""
Document-level metrics
======================

d-BLEU over whole documents, terminology consistency, zero-pronoun
accuracy and consistency ratios along graph paths.
"""

from discourse_mt.core import DiscourseGraph, discourses_from_spans
from discourse_mt.metrics import (
    TermLexicon,
    ZPAnnotation,
    azpt,
    consistency_ratio,
    ctt,
    d_bleu_details,
    path_stats,
)

# d-BLEU treats each document as one segment.
score = d_bleu_details("a b c d e f", ["a b x d e f"])
print(round(score.score, 4), score.matches, score.totals)

# Terminology consistency: share of occurrence pairs rendered the same way.
lexicon = TermLexicon.from_json([{"term": "museum", "variants": ["Museum", "Haus"]}])
sources = ["The museum opened.", "The museum closed.", "The museum reopened."]
targets = ["Das Museum öffnete.", "Das Haus schloss.", "Das Museum öffnete wieder."]
print(ctt(sources, targets, lexicon))

# Zero pronouns: does the translation recover the dropped pronoun?
zp = ZPAnnotation.from_json([{"discourse": 0, "gold": "sie"}, {"discourse": 1, "gold": "er"}])
print(azpt(["Sie kam spät.", "Dann ging sie."], zp))

# Consistency ratio: leading consistent nodes over path length.
print(consistency_ratio([True, True, True, False, True]))

# Path statistics over a small graph.
g = DiscourseGraph(discourses_from_spans([(0, 0), (1, 1), (2, 2)]), frozenset({(0, 1), (1, 2), (0, 2)}))
print(path_stats(g, node_consistency=[True, True, False]).to_dict())
