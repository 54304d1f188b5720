import math

from polycarleson.criteria import (
    BOUNDED,
    NECESSITY_FAILS,
    SUFFICIENCY_HOLDS,
    UNBOUNDED,
    check_rank_sufficiency,
    decide_bidisc,
    decide_tridisc,
    reverify_witness,
)
from polycarleson.symbols import PolySymbol

TWO_PI = 2.0 * math.pi


def product_entries(n):
    return [((1,) * n, 1.0)]


def stacked_product(n):
    """(f, ..., f, 0) with f = z1 ... zn."""
    return PolySymbol.from_tables([product_entries(n)] * (n - 1) + [[]], n)


def mean_product_map():
    return PolySymbol.from_tables(
        [[((1, 0), 0.5), ((0, 1), 0.5)], [((1, 1), 1.0)]], 2
    )


def coord_square_map():
    return PolySymbol.from_tables([[((1, 0), 1.0)], [((0, 2), 1.0)]], 2)


def damped_product_map():
    return PolySymbol.from_tables([[((1, 1), 1.0)], [((1, 1), 0.5)]], 2)


def repeated_product3():
    return PolySymbol.from_tables(
        [[((1, 1, 0), 1.0)], [((1, 1, 0), 1.0)], []], 3
    )


class TestRankSufficiency:
    def test_identity_holds(self):
        v = check_rank_sufficiency(PolySymbol.identity(2))
        assert v.outcome == SUFFICIENCY_HOLDS
        assert len(v.evidence) == 3  # {0}, {1}, {0,1}

    def test_stacked_product_fails_on_pairs(self):
        v = check_rank_sufficiency(stacked_product(3), grid_res=96)
        assert v.outcome == NECESSITY_FAILS
        assert v.witness is not None
        assert v.witness.rank < v.witness.target
        assert len(v.witness_index_set) >= 2

    def test_coord_square_holds(self):
        v = check_rank_sufficiency(coord_square_map())
        assert v.outcome == SUFFICIENCY_HOLDS

    def test_witness_reverifies(self):
        sym = stacked_product(3)
        v = check_rank_sufficiency(sym, grid_res=96)
        assert reverify_witness(sym, v.witness, v.witness_index_set)

    def test_json_round_trip(self):
        import json

        v = check_rank_sufficiency(PolySymbol.identity(2))
        data = json.loads(v.to_json())
        assert data["outcome"] == SUFFICIENCY_HOLDS


class TestBidisc:
    def test_identity_bounded(self):
        d = decide_bidisc(PolySymbol.identity(2))
        assert d.outcome == BOUNDED

    def test_coord_square_bounded(self):
        d = decide_bidisc(coord_square_map())
        assert d.outcome == BOUNDED

    def test_damped_product_vacuously_bounded(self):
        d = decide_bidisc(damped_product_map())
        assert d.outcome == BOUNDED
        assert "vacuous" in d.detail

    def test_mean_product_unbounded_with_diagonal_witness(self):
        d = decide_bidisc(mean_product_map())
        assert d.outcome == UNBOUNDED
        assert d.witness is not None
        a1, a2 = d.witness.point.angles
        assert abs((a1 - a2 + math.pi) % TWO_PI - math.pi) < 1e-3
        # the witness re-fails on re-evaluation
        assert reverify_witness(mean_product_map(), d.witness, (0, 1))

    def test_hardy_space_reported(self):
        d = decide_bidisc(PolySymbol.identity(2), beta=-0.5)
        assert any("H2" in s for s in d.spaces)

    def test_beta_does_not_change_outcome(self):
        for beta in (-0.5, 0.0, 1.0):
            assert decide_bidisc(mean_product_map(), beta=beta).outcome == UNBOUNDED


class TestTridisc:
    def test_identity_bounded(self):
        d = decide_tridisc(PolySymbol.identity(3), grid_res=96)
        assert d.outcome == BOUNDED

    def test_stacked_product_bounded_via_entries(self):
        # pairs of equal components have dependent gradients but all six
        # derivative entries are unimodular on the contact set
        d = decide_tridisc(stacked_product(3), grid_res=96)
        assert d.outcome == BOUNDED

    def test_repeated_product_unbounded(self):
        d = decide_tridisc(repeated_product3(), grid_res=96)
        assert d.outcome == UNBOUNDED
        assert d.witness is not None
        assert d.witness_index_set == (0, 1)

    def test_sufficient_but_not_necessary_separation(self):
        sym = stacked_product(3)
        verdict = check_rank_sufficiency(sym, grid_res=96)
        decision = decide_tridisc(sym, grid_res=96)
        assert verdict.outcome == NECESSITY_FAILS
        assert decision.outcome == BOUNDED


class TestConsistency:
    def test_bidisc_matches_rank_sufficiency(self):
        battery = [
            PolySymbol.identity(2),
            coord_square_map(),
            mean_product_map(),
            damped_product_map(),
            PolySymbol.from_tables([[((0, 1), 1.0)], [((1, 0), 1.0)]], 2),  # swap
        ]
        for sym in battery:
            d = decide_bidisc(sym)
            v = check_rank_sufficiency(sym)
            if d.outcome == BOUNDED:
                # the joint clause of the sufficiency check must pass too
                joint = [e for e in v.evidence if e.index_set == (0, 1)][0]
                assert joint.min_rank in (None, 2)
            else:
                assert v.outcome == NECESSITY_FAILS
