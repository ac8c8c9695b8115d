"""Literal transcriptions of printed amplitudes and tables, used as oracles."""

# |Phi+>_AB (x) |X>_CD after both cavities, keyed by "ac.bd".
EVOLVED_FROM_PHI_PLUS = {
    "PhiPlus": {"gg.ee": -0.5j, "ee.gg": -0.5j, "ge.eg": -0.5j, "eg.ge": -0.5j},
    "PhiMinus": {"gg.gg": 0.5, "ee.ee": -0.5, "ge.ge": -0.5, "eg.eg": 0.5},
    "PsiPlus": {"gg.eg": -0.5j, "ee.ge": -0.5j, "ge.ee": -0.5j, "eg.gg": -0.5j},
    "PsiMinus": {"gg.ge": 0.5, "ee.eg": -0.5, "ge.gg": -0.5, "eg.ee": 0.5},
}

COLUMNS = ["PsiPlus", "PsiMinus", "PhiPlus", "PhiMinus"]
SWAP_TABLE = {
    "PsiPlus": ["C1", "C0", "C3", "C2"],
    "PsiMinus": ["C0", "C1", "C2", "C3"],
    "PhiPlus": ["C2", "C3", "C0", "C1"],
    "PhiMinus": ["C3", "C2", "C1", "C0"],
}

COLLECTIONS = {
    "C0": {"gg.ee", "ee.gg", "ge.eg", "eg.ge"},
    "C1": {"gg.gg", "ee.ee", "ge.ge", "eg.eg"},
    "C2": {"gg.eg", "ee.ge", "ge.ee", "eg.gg"},
    "C3": {"gg.ge", "ee.eg", "ge.gg", "eg.ee"},
}


def key_to_index(key: str) -> int:
    """'ac.bd' -> basis index in (A, C, B, D) order."""
    bits = key.replace(".", "").replace("g", "0").replace("e", "1")
    return int(bits, 2)
