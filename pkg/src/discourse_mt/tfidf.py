"""TF-IDF vectors and cosine similarity for sentences and discourses.

Vectors come from scikit-learn's TfidfVectorizer with smoothed idf and L2
normalisation, fitted on the texts of a single document. Tokens are
lower-cased whitespace words with surrounding punctuation removed; words in
scripts written without spaces (such as Chinese or Thai) are split per
character.
"""
from __future__ import annotations

import re
import unicodedata
from typing import Sequence

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer

_SPACELESS = re.compile(r"[\u0e00-\u0e7f\u3040-\u30ff\u3400-\u4dbf\u4e00-\u9fff\uf900-\ufaff]")


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith(("P", "S"))


def tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    for word in text.lower().split():
        if _SPACELESS.search(word):
            tokens.extend(ch for ch in word if not _is_punct(ch) and not ch.isspace())
            continue
        start, end = 0, len(word)
        while start < end and _is_punct(word[start]):
            start += 1
        while end > start and _is_punct(word[end - 1]):
            end -= 1
        if start < end:
            tokens.append(word[start:end])
    return tokens


def tfidf_matrix(texts: Sequence[str]) -> np.ndarray:
    """Dense (len(texts), vocab) matrix; rows of token-less texts are zero."""
    if not any(tokenize(t) for t in texts):
        return np.zeros((len(texts), 0))
    vec = TfidfVectorizer(analyzer=tokenize, smooth_idf=True, norm="l2", sublinear_tf=False)
    return vec.fit_transform(list(texts)).toarray()


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def cosine_matrix(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = m / safe[:, None]
    sims = unit @ unit.T
    zero = norms == 0.0
    sims[zero, :] = 0.0
    sims[:, zero] = 0.0
    return sims


def tfidf_embedder(texts: Sequence[str]) -> np.ndarray:
    return tfidf_matrix(texts)
