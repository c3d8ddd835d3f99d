import ast
from pathlib import Path
from typing import Iterator, Optional

SOURCE = Path(__file__).resolve().parent.parent / "src" / "mdgp"
# typing names added after Python 3.9.
NEWER_TYPING = {"TypeAlias", "ParamSpec", "Concatenate", "TypeGuard",
                "Self", "Never", "LiteralString", "TypeVarTuple", "Unpack",
                "assert_never", "reveal_type"}


def source_trees() -> Iterator[ast.Module]:
    for path in sorted(SOURCE.glob("*.py")):
        yield ast.parse(path.read_text(), filename=str(path))


def annotations(node: ast.AST) -> Iterator[Optional[ast.expr]]:
    if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
        args = node.args
        for arg in args.posonlyargs + args.args + args.kwonlyargs:
            yield arg.annotation
        yield args.vararg.annotation if args.vararg else None
        yield args.kwarg.annotation if args.kwarg else None
        yield node.returns
    elif isinstance(node, ast.AnnAssign):
        yield node.annotation


def test_sources_avoid_newer_typing() -> None:
    for tree in source_trees():
        for node in ast.walk(tree):
            if isinstance(node, ast.ImportFrom) and node.module in (
                    "typing", "typing_extensions"):
                names = {alias.name for alias in node.names}
                assert not names & NEWER_TYPING, names & NEWER_TYPING


def test_sources_avoid_union_operator_annotations() -> None:
    for tree in source_trees():
        for node in ast.walk(tree):
            for annotation in annotations(node):
                if annotation is None:
                    continue
                for part in ast.walk(annotation):
                    assert not (isinstance(part, ast.BinOp)
                                and isinstance(part.op, ast.BitOr)), \
                        ast.dump(annotation)
