"""Smoke test for the pysiegel extension.

Uses an installed `pysiegel` if there is one, otherwise the library from
`cargo build --release -p siegel-eis-py`.
"""

import importlib.machinery
import importlib.util
import json
import pathlib
import sys


def load():
    try:
        import pysiegel

        return pysiegel
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for name in ("libpysiegel.so", "libpysiegel.dylib", "pysiegel.dll"):
        lib = root / "target" / "release" / name
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("pysiegel", str(lib))
            spec = importlib.util.spec_from_file_location("pysiegel", lib, loader=loader)
            mod = importlib.util.module_from_spec(spec)
            loader.exec_module(mod)
            return mod
    sys.exit("pysiegel not found: run `cargo build --release -p siegel-eis-py` first")


def main():
    ps = load()

    chi = ps.Character("odd4")
    assert chi.modulus == 4 and chi.parity == 1 and chi.value(3) == "-1"

    # Kitaoka's formula and the brute-force series agree at X = p^{-k}
    h = [[1, 0], [0, 3]]
    coeffs = ps.brute_force_bp(h, 3, 7)
    from fractions import Fraction

    x = Fraction(1, 3**6)
    bf = sum(Fraction(c) * x**i for i, c in enumerate(coeffs))
    assert Fraction(ps.kitaoka_bp(h, 3, 6)) == bf

    assert ps.f_poly([[1, 0], [0, 9]], 3, -1) == "1 + (3)X + (27)X^2"

    spec = ps.EisensteinSpec(1, 4, 5, "odd4")
    exp = ps.build_expansion(spec, 6)
    assert len(exp) > 0
    assert exp.is_p_integral(13) and exp.is_p_integral(17)
    assert json.loads(exp.to_json())["spec"]["k"] == 5

    _, cuspidal = ps.pullback_check(ps.EisensteinSpec(1, 4, 7, "odd4", 1), 6)
    assert cuspidal

    re, im = ps.archimedean_i(6, 1, 0.0, 1.0)
    assert abs(complex(re, im)) < 1e-10

    try:
        ps.EisensteinSpec(1, 3, 1, "kron:-3")
    except ValueError:
        pass
    else:
        raise AssertionError("k below n + 1 must be rejected")

    print("pysiegel smoke test: ok")


if __name__ == "__main__":
    main()
