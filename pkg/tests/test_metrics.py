import ast
from pathlib import Path

PACKAGE = Path(__file__).resolve().parents[1] / "rass"


def _functions_in_file(path: Path):
    tree = ast.parse(path.read_text(encoding="utf-8"))
    for node in ast.walk(tree):
        if isinstance(node, ast.FunctionDef):
            yield node


def test_function_lengths_under_soft_cap():
    lengths = {
        f"{path.name}:{func.name}": func.end_lineno - func.lineno
        for path in sorted(PACKAGE.glob("*.py"))
        for func in _functions_in_file(path)
    }
    assert lengths
    # loose guardrail; the branch-and-bound loop is the longest body today
    assert max(lengths.values()) < 150, max(lengths, key=lengths.__getitem__)
