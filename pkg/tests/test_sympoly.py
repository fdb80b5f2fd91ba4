"""Polynomial kernel tests: ring ops, characteristic polynomials, minors,
and equivalence with brute-force oracles."""

from __future__ import annotations

import pytest

from identkit.model import MODE_DIAG, MODE_EXPLICIT, Param, compartmental_matrix, make_model
from identkit.sympoly import (
    EvalPoint,
    SparsePoly,
    VariableMismatch,
    VarTable,
    char_matrix,
    char_poly_coeffs,
    determinant,
    signed_minor_coeffs,
)

from conftest import cascade_exchange, random_model
from oracles import leibniz_det


def mono(table, *params, coeff=1):
    out = SparsePoly.const(table, coeff)
    for p in params:
        out = out * SparsePoly.var(table, p)
    return out


def table_for(*params):
    return VarTable(tuple(params))


a21, a32, a23, a34, a43 = (
    Param("edge", 2, 1),
    Param("edge", 3, 2),
    Param("edge", 2, 3),
    Param("edge", 3, 4),
    Param("edge", 4, 3),
)
a11, a22, a33, a44 = (Param.diag(v) for v in (1, 2, 3, 4))


class TestRingOps:
    def test_partial_of_product(self):
        t = table_for(a21, a32)
        assert mono(t, a21, a32).partial(a21) == mono(t, a32)

    def test_expand_two_linear_factors(self):
        t = table_for(a11, a22)
        d = SparsePoly.d_var(t)
        lhs = (d - mono(t, a11)) * (d - mono(t, a22))
        expected = d * d - (mono(t, a11) + mono(t, a22)) * d + mono(t, a11, a22)
        assert lhs == expected

    def test_partial_with_sign(self):
        t = table_for(a23, a32, a11, a22)
        poly = mono(t, a11, a22) - mono(t, a23, a32)
        assert poly.partial(a23) == mono(t, a32, coeff=-1)

    def test_variable_mismatch(self):
        t1, t2 = table_for(a21), table_for(a32)
        with pytest.raises(VariableMismatch):
            _ = SparsePoly.var(t1, a21) + SparsePoly.var(t2, a32)
        with pytest.raises(VariableMismatch):
            t1.index_of(a32)

    def test_zero_normalization(self):
        t = table_for(a21)
        p = mono(t, a21) - mono(t, a21)
        assert p.is_zero() and p.terms == {}

    def test_str_rendering(self):
        t = table_for(a21, a33)
        assert str(mono(t, a21, coeff=-1) + mono(t, a33, a33)) == "a33^2 - a21"
        assert str(SparsePoly.zero(t)) == "0"


class TestEvaluate:
    def test_product(self):
        t = table_for(a21, a32)
        pt = EvalPoint(t, (2, 3))
        assert mono(t, a21, a32).evaluate(pt) == 6

    def test_zero_poly(self):
        t = table_for(a21)
        assert SparsePoly.zero(t).evaluate(EvalPoint(t, (7,))) == 0

    def test_d_is_not_evaluable(self):
        t = table_for(a21)
        with pytest.raises(VariableMismatch):
            SparsePoly.d_var(t).evaluate(EvalPoint(t, (1,)))

    def test_modular(self):
        t = table_for(a21)
        p = mono(t, a21, a21, coeff=5)
        assert p.evaluate(EvalPoint(t, (-3,), modulus=7)) == (5 * 9) % 7

    def test_char_poly_outputs_are_d_free(self):
        mat = compartmental_matrix(cascade_exchange(), MODE_DIAG)
        pt = EvalPoint(mat.table, tuple(range(1, len(mat.table.params) + 1)))
        for coeff in char_poly_coeffs(mat.entries, mat.table):
            coeff.evaluate(pt)  # must not raise


class TestCharPoly:
    def test_top_coefficient_of_worked_example(self):
        mat = compartmental_matrix(cascade_exchange(), MODE_DIAG)
        coeffs = char_poly_coeffs(mat.entries, mat.table)
        t = mat.table
        expected = -(mono(t, a11) + mono(t, a22) + mono(t, a33) + mono(t, a44))
        assert coeffs[0] == expected

    def test_constant_coefficient_of_worked_example(self):
        mat = compartmental_matrix(cascade_exchange(), MODE_DIAG)
        coeffs = char_poly_coeffs(mat.entries, mat.table)
        t = mat.table
        expected = (
            -mono(t, a11, a22, a34, a43)
            - mono(t, a11, a23, a32, a44)
            + mono(t, a11, a22, a33, a44)
        )
        assert coeffs[-1] == expected

    def test_one_by_one(self):
        m = make_model(1, [], {1}, {1}, {1})
        mat = compartmental_matrix(m, MODE_DIAG)
        coeffs = char_poly_coeffs(mat.entries, mat.table)
        assert coeffs == [mono(mat.table, Param.diag(1), coeff=-1)]


class TestSignedMinor:
    def test_worked_example_input_to_output(self):
        mat = compartmental_matrix(cascade_exchange(), MODE_DIAG)
        t = mat.table
        coeffs = signed_minor_coeffs(mat.entries, t, 1, 2)
        assert coeffs == [
            mono(t, a21),
            -mono(t, a21, a33) - mono(t, a21, a44),
            mono(t, a21, a33, a44) - mono(t, a21, a34, a43),
        ]

    def test_two_chain(self):
        m = make_model(2, [(1, 2)], {1}, {2}, {1, 2})
        mat = compartmental_matrix(m, MODE_DIAG)
        coeffs = signed_minor_coeffs(mat.entries, mat.table, 1, 2)
        assert coeffs == [mono(mat.table, Param("edge", 2, 1))]

    def test_principal_minor_is_char_poly_of_submatrix(self):
        m = make_model(3, [], {1}, {1}, {1, 2, 3})
        mat = compartmental_matrix(m, MODE_DIAG)
        got = signed_minor_coeffs(mat.entries, mat.table, 1, 1)
        sub = [[mat.entries[r][c] for c in (1, 2)] for r in (1, 2)]
        assert got == char_poly_coeffs(sub, mat.table)


class TestDeterminantOracle:
    """Exact equality with the n!-term permutation expansion."""

    def test_char_and_minors_match_leibniz(self, rng):
        cases = 0
        while cases < 200:
            model = random_model(rng, n_range=(1, 5), full_leaks=rng.random() < 0.5)
            mode = MODE_DIAG if model.leaks == frozenset(model.vertices) else MODE_EXPLICIT
            mat = compartmental_matrix(model, mode)
            cm = char_matrix(mat.entries, mat.table)
            assert determinant(cm, mat.table) == leibniz_det(cm, mat.table)
            n = model.n
            if n >= 2:
                i = rng.randint(1, n)
                j = rng.randint(1, n)
                sub = [
                    [cm[r][c] for c in range(n) if c != j - 1]
                    for r in range(n)
                    if r != i - 1
                ]
                direct = leibniz_det(sub, mat.table)
                if (i + j) % 2:
                    direct = -direct
                listed = signed_minor_coeffs(mat.entries, mat.table, i, j)
                for power, coeff in enumerate(reversed(listed)):
                    assert coeff == direct.d_coefficient(power)
            cases += 1


def _disjoint_cycle_collections(model, k):
    """All collections of vertex-disjoint cycles (self-cycles included)
    covering exactly k edges; yields (sign, param tuple)."""
    cycles = [((v,), (Param.diag(v),), 1) for v in model.vertices]
    from oracles import all_simple_cycles_brute

    for edge_set in sorted(all_simple_cycles_brute(model), key=sorted):
        verts = tuple(sorted({v for e in edge_set for v in e}))
        params = tuple(Param.edge(s, d) for s, d in sorted(edge_set))
        sign = 1 if len(edge_set) % 2 == 1 else -1
        cycles.append((verts, params, sign))

    results = []

    def extend(idx, used, edges_left, sign, params):
        if edges_left == 0:
            results.append((sign, params))
            return
        for t in range(idx, len(cycles)):
            verts, ps, s = cycles[t]
            if len(ps) <= edges_left and not (set(verts) & used):
                extend(t + 1, used | set(verts), edges_left - len(ps), sign * s, params + ps)

    extend(0, set(), k, 1, ())
    return results


class TestCycleExpansion:
    """Coefficient of D^(n-k) equals the signed sum over vertex-disjoint
    cycle collections with k edges."""

    def test_against_collection_enumerator(self, rng):
        for _ in range(200):
            model = random_model(rng, n_range=(1, 5), full_leaks=True, edge_bias=0.3)
            mat = compartmental_matrix(model, MODE_DIAG)
            t = mat.table
            coeffs = char_poly_coeffs(mat.entries, t)
            for k in range(1, model.n + 1):
                expected = SparsePoly.zero(t)
                for sign, params in _disjoint_cycle_collections(model, k):
                    expected = expected + mono(t, *params, coeff=sign)
                if k % 2 == 1:
                    expected = -expected
                assert coeffs[k - 1] == expected, (model, k)


class TestDerivativeIdentity:
    """The signed (i,j) minor is minus the a_ij-partial of the
    characteristic polynomial after making entry (i,j) symbolic."""

    def test_minor_is_partial_of_extended_char_poly(self, rng):
        cases = 0
        while cases < 120:
            model = random_model(rng, n_range=(2, 4), full_leaks=True, edge_bias=0.4)
            n = model.n
            i, j = rng.randint(1, n), rng.randint(1, n)
            if i == j or model.has_edge(j, i):
                continue
            extended = make_model(
                n, tuple(model.edges) + ((j, i),), model.inputs, model.outputs, model.leaks
            )
            table = extended.vartable(MODE_DIAG)
            base = compartmental_matrix(model, MODE_DIAG, table)
            added = Param.edge(j, i)
            tilde = [list(row) for row in base.entries]
            tilde[i - 1][j - 1] = SparsePoly.var(table, added)
            det_tilde = determinant(char_matrix(tilde, table), table)
            cm = char_matrix(base.entries, table)
            sub = [
                [cm[r][c] for c in range(n) if c != j - 1] for r in range(n) if r != i - 1
            ]
            minor = determinant(sub, table)
            if (i + j) % 2:
                minor = -minor
            assert minor == -det_tilde.partial(added)
            cases += 1
