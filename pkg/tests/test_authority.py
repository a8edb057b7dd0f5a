import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcert.authority import (
    Certificate,
    MasterKey,
    PlacementMode,
    assemble_stream,
    collapse_certificate,
    extract_stream,
    gen_master_key,
    issue_batch,
    placement_positions,
    verify,
)
from qcert.bits import to_bits, xor_bits
from qcert.errors import AlreadyCollapsed, InvalidArgument
from qcert.qsim import bell_state
from qcert.rng import RandomSource

bitlists = st.lists(st.integers(0, 1), max_size=24)


def reference_split(stream, positions):
    """Bookkeeping oracle for extract_stream, written without set lookups."""
    message, cert = [], []
    for i, b in enumerate(stream):
        (cert if i in list(positions) else message).append(b)
    return tuple(message), tuple(cert)


class TestMasterKey:
    def test_empty(self):
        assert gen_master_key(0, RandomSource(1)).bits == ()

    def test_length_and_determinism(self):
        k1 = gen_master_key(4, RandomSource(77))
        k2 = gen_master_key(4, RandomSource(77))
        assert len(k1) == 4 and k1 == k2

    def test_fixture_key(self):
        key = MasterKey.parse("1001")
        assert [t.parity for t in key.bell_types()] == [1, 0, 0, 1]
        assert key.value == 9

    def test_bad_bits(self):
        with pytest.raises(InvalidArgument):
            MasterKey.parse("10x1")


class TestIssueBatch:
    def test_example_key_bell_types(self):
        alice, bob = issue_batch(MasterKey.parse("1001"))
        assert [str(p.bell) for p in alice.pairs] == ["b01", "b00", "b00", "b01"]
        assert alice.pairs is bob.pairs

    def test_empty(self):
        alice, bob = issue_batch(MasterKey(()))
        assert len(alice) == len(bob) == 0

    def test_joint_states_match(self):
        key = MasterKey.parse("0110100")
        alice, _ = issue_batch(key)
        for pair, b in zip(alice.pairs, key.bits):
            expected = bell_state(pair.bell)
            assert pair.bell.parity == b
            assert max(abs(x - y) for x, y in zip(pair.joint.amplitudes(), expected.amplitudes())) <= 1e-12


class TestCollapse:
    @pytest.mark.parametrize("seed", range(20))
    @pytest.mark.parametrize("alice_first", [True, False])
    def test_correlation_law(self, seed, alice_first):
        rng = RandomSource(seed)
        key = gen_master_key(16, rng)
        a_view, b_view = issue_batch(key)
        if alice_first:
            ca, cb = collapse_certificate(a_view, rng), collapse_certificate(b_view, rng)
        else:
            cb, ca = collapse_certificate(b_view, rng), collapse_certificate(a_view, rng)
        assert xor_bits(ca.bits, cb.bits) == key.bits

    def test_double_collapse(self):
        a_view, _ = issue_batch(MasterKey.parse("10"))
        rng = RandomSource(0)
        collapse_certificate(a_view, rng)
        with pytest.raises(AlreadyCollapsed):
            collapse_certificate(a_view, rng)

    def test_marginals_uniform(self):
        rng = RandomSource(5)
        key = MasterKey.parse("1001")
        ones_a = [0] * 4
        ones_b = [0] * 4
        for _ in range(10_000):
            a_view, b_view = issue_batch(key)
            ca = collapse_certificate(a_view, rng)
            cb = collapse_certificate(b_view, rng)
            for i in range(4):
                ones_a[i] += ca.bits[i]
                ones_b[i] += cb.bits[i]
        for c in ones_a + ones_b:
            assert 0.48 <= c / 10_000 <= 0.52


class TestVerify:
    def test_example_authentic(self):
        r = verify(MasterKey.parse("1001"), Certificate.parse("0101"), Certificate.parse("1100"))
        assert r.residue == (0, 0, 0, 0) and r.authentic

    def test_example_not_authentic(self):
        r = verify(MasterKey.parse("1001"), Certificate.parse("0001"), Certificate.parse("1100"))
        assert r.residue == (0, 1, 0, 0) and not r.authentic

    def test_all_zero(self):
        assert verify(MasterKey.parse("0000"), Certificate.parse("0000"), Certificate.parse("0000")).authentic

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            verify(MasterKey.parse("1001"), Certificate.parse("010"), Certificate.parse("1100"))

    @given(st.integers(0, 12).flatmap(lambda n: st.tuples(*[st.lists(st.integers(0, 1), min_size=n, max_size=n)] * 4)))
    def test_symmetric_and_mask_invariant(self, data):
        key, c1, c2, mask = (to_bits(x) for x in data)
        k = MasterKey(key)
        r = verify(k, Certificate(c1), Certificate(c2))
        assert r == verify(k, Certificate(c2), Certificate(c1))
        masked = verify(k, Certificate(xor_bits(c1, mask)), Certificate(xor_bits(c2, mask)))
        assert masked == r
        assert r.authentic == (r.residue == (0,) * len(key))


class TestPlacement:
    def test_example_key(self):
        assert placement_positions(MasterKey.parse("1001"), 8) == [0, 1, 2, 3]

    @pytest.mark.parametrize("m", [0, 1, 7, 30])
    def test_zero_key(self, m):
        assert placement_positions(MasterKey.parse("0000"), m) == [0, 1, 2, 3]

    def test_offset_three(self):
        assert placement_positions(MasterKey.parse("0011"), 5) == [3, 4, 5, 6]

    def test_append_end(self):
        assert placement_positions(MasterKey.parse("0011"), 5, PlacementMode.APPEND_END) == [5, 6, 7, 8]

    @given(bitlists, st.integers(0, 40))
    def test_strictly_increasing_in_range(self, key_bits, m):
        pos = placement_positions(MasterKey(key_bits), m)
        assert len(pos) == len(key_bits)
        assert all(b > a for a, b in zip(pos, pos[1:]))
        assert all(0 <= p < m + len(key_bits) for p in pos)


class TestAssembleExtract:
    def test_concatenation_case(self):
        s = assemble_stream("10110010", Certificate.parse("0101"), [0, 1, 2, 3])
        assert "".join(map(str, s)) == "010110110010"

    def test_empty_cert(self):
        assert assemble_stream("1011", Certificate(()), []) == (1, 0, 1, 1)

    def test_round_trip_random(self):
        gen = random.Random(2024)
        for _ in range(500):
            m = gen.randrange(0, 20)
            n = gen.randrange(0, 10)
            msg = tuple(gen.getrandbits(1) for _ in range(m))
            cert = Certificate(tuple(gen.getrandbits(1) for _ in range(n)))
            positions = sorted(gen.sample(range(m + n), n))
            stream = assemble_stream(msg, cert, positions)
            assert reference_split(stream, positions) == (msg, cert.bits)
            assert extract_stream(stream, positions) == (msg, cert)

    @pytest.mark.parametrize("positions", [[1, 0], [0, 0], [0, 9], [-1, 2]])
    def test_invalid_positions(self, positions):
        with pytest.raises(InvalidArgument):
            assemble_stream("1010", Certificate.parse("11"), positions)
        with pytest.raises(InvalidArgument):
            extract_stream("101011", positions)

    def test_position_count_mismatch(self):
        with pytest.raises(InvalidArgument):
            assemble_stream("1010", Certificate.parse("11"), [0])
