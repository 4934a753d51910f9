"""Shared inputs for the test modules."""

import json
from pathlib import Path

from goimall import corpus as corpus_mod
from goimall.indexed_logic import IndexedFamily
from goimall.mall_syntax import check_proof, is_cut_free, parse_proof

DATA = Path(__file__).resolve().parent.parent / "data"


def load(name: str):
    p = parse_proof((DATA / name).read_text())
    check_proof(p)
    return p


def load_family(name: str) -> IndexedFamily:
    return IndexedFamily.from_json(json.loads((DATA / name).read_text()))


# the rich signature up to 4 rule nodes: 4296 proofs, 148 of them with cuts
SMALL = corpus_mod.corpus(4)
SMALL_WITH_CUTS = [p for p in SMALL if not is_cut_free(p)]
SMALL_WITH_POINTS = [p for p in SMALL if corpus_mod.points_sorted(p)]

# the criterion signature up to 6 rule nodes reaches every redex kind
MEDIUM_WITH_CUTS = [p for p in corpus_mod.corpus(6, corpus_mod.CRITERION_SIGNATURE) if not is_cut_free(p)]
