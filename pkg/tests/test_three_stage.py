import math
import random

import pytest

from oracles import intercept_resend_rates
from qcert.authority import (
    Certificate,
    MasterKey,
    assemble_stream,
    extract_stream,
    placement_positions,
)
from qcert.errors import InvalidArgument
from qcert.qsim import ONE, ZERO, StateVec1, measure1
from qcert.rng import RandomSource
from qcert.three_stage import (
    InterceptResend,
    PartySecret,
    TapPoint,
    encode_bit,
    passthrough,
    run_certified_session,
    run_session,
)


def bits(s):
    return tuple(int(c) for c in s)


class TestEncode:
    def test_basis(self):
        assert encode_bit(0) == ZERO
        assert encode_bit(1) == ONE

    @pytest.mark.parametrize("seed", range(10))
    def test_measure_round_trip(self, seed):
        rng = RandomSource(seed)
        for b in (0, 1):
            assert measure1(encode_bit(b), rng)[0] == b

    def test_bad_bit(self):
        with pytest.raises(InvalidArgument):
            encode_bit(2)


class TestHonestSession:
    def test_worked_case(self):
        t = run_session(PartySecret(0.3), PartySecret(1.1), "1011")
        assert t.received_bits == bits("1011")

    def test_long_message_and_transcript(self):
        rng = RandomSource(8)
        msg = rng.next_bits(64)
        t = run_session(PartySecret.random(rng), PartySecret.random(rng), msg, rng=rng)
        assert t.received_bits == msg
        assert len(t.transmissions) == 192
        for stage in TapPoint:
            idx = [x.qubit_index for x in t.transmissions if x.stage is stage]
            assert idx == list(range(64))

    def test_final_states_are_basis_states(self):
        rng = RandomSource(9)
        for _ in range(50):
            msg = rng.next_bits(32)
            t = run_session(PartySecret.random(rng), PartySecret.random(rng), msg, rng=rng)
            for b, s in zip(msg, t.final_states):
                assert abs(s.a1 if b else s.a0) ** 2 == pytest.approx(1.0, abs=1e-9)
            for x in t.transmissions:
                assert x.state_before_tap.is_normalized() and x.state_after_tap == x.state_before_tap

    def test_empty_message(self):
        with pytest.raises(InvalidArgument):
            run_session(PartySecret(0.1), PartySecret(0.2), "")

    def test_secret_angle_canonical_range(self):
        assert PartySecret(-0.5).angle == pytest.approx(2 * math.pi - 0.5)
        with pytest.raises(InvalidArgument):
            PartySecret(math.inf)


class TestInterceptors:
    def test_passthrough_is_neutral(self):
        a, b = PartySecret(0.4), PartySecret(2.2)
        msg = RandomSource(1).next_bits(40)
        plain = run_session(a, b, msg, rng=RandomSource(3))
        tapped = run_session(a, b, msg, passthrough(), RandomSource(3))
        assert plain.received_bits == tapped.received_bits
        assert plain.transmissions == tapped.transmissions
        assert all(tapped.tapped.values()) and not any(plain.tapped.values())

    def test_unnormalized_forward_rejected(self):
        def bad(stage, idx, state):
            return StateVec1(2 + 0j, 0j)

        with pytest.raises(InvalidArgument):
            run_session(PartySecret(0.1), PartySecret(0.2), "1", bad)

    def test_stage_restriction(self):
        eve = InterceptResend(TapPoint.STAGE2, RandomSource(0))
        t = run_session(PartySecret(0.1), PartySecret(0.2), "101", eve, RandomSource(1))
        assert t.tapped == {TapPoint.STAGE1: False, TapPoint.STAGE2: True, TapPoint.STAGE3: False}
        assert len(eve.measured) == 3

    @pytest.mark.parametrize("theta", [math.pi / 8, math.pi / 4, math.pi / 3])
    def test_stage1_disturbance_curve(self, theta):
        rng = RandomSource(int(theta * 1000))
        msg = rng.next_bits(10_000)
        eve = InterceptResend(TapPoint.STAGE1, rng.split())
        t = run_session(PartySecret(theta), PartySecret(1.1), msg, eve, rng)
        ber = sum(x != y for x, y in zip(msg, t.received_bits)) / len(msg)
        assert ber == pytest.approx(math.sin(2 * theta) ** 2 / 2, abs=0.02)

    @pytest.mark.parametrize("stage", [2, 3])
    def test_later_stage_disturbance_matches_matrix_oracle(self, stage):
        ta, tb = 0.5, 1.3
        rng = RandomSource(stage)
        msg = rng.next_bits(10_000)
        eve = InterceptResend(TapPoint(stage), rng.split())
        t = run_session(PartySecret(ta), PartySecret(tb), msg, eve, rng)
        ber = sum(x != y for x, y in zip(msg, t.received_bits)) / len(msg)
        match = sum(x == y for x, y in zip(msg, eve.measured)) / len(msg)
        exp_ber, exp_match = intercept_resend_rates(ta, tb, stage)
        assert ber == pytest.approx(exp_ber, abs=0.02)
        assert match == pytest.approx(exp_match, abs=0.02)


class TestCertifiedSession:
    def test_honest_channel(self):
        msg, cert = bits("10110010"), Certificate.parse("0101")
        got_msg, got_cert, t = run_certified_session(
            PartySecret(0.3), PartySecret(1.7), msg, cert, MasterKey.parse("1001")
        )
        assert got_msg == msg and got_cert == cert
        assert len(t.transmissions) == 3 * 12

    def test_matches_plain_session_on_assembled_stream(self):
        key, cert = MasterKey.parse("0011"), Certificate.parse("1110")
        msg = bits("11001")
        a, b = PartySecret(0.9), PartySecret(0.2)
        _, _, t = run_certified_session(a, b, msg, cert, key, passthrough(), RandomSource(4))
        stream = assemble_stream(msg, cert, placement_positions(key, len(msg)))
        plain = run_session(a, b, stream, rng=RandomSource(4))
        assert t.transmissions == plain.transmissions
        assert t.received_bits == plain.received_bits

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            run_certified_session(
                PartySecret(0.1), PartySecret(0.2), "1010", Certificate.parse("01"), MasterKey.parse("011")
            )

    def test_round_trip_random(self):
        gen = random.Random(99)
        for _ in range(200):
            m, n = gen.randrange(1, 24), gen.randrange(0, 8)
            msg = tuple(gen.getrandbits(1) for _ in range(m))
            cert = Certificate(tuple(gen.getrandbits(1) for _ in range(n)))
            key = MasterKey(tuple(gen.getrandbits(1) for _ in range(n)))
            got_msg, got_cert, _ = run_certified_session(
                PartySecret(gen.uniform(0, 7)), PartySecret(gen.uniform(0, 7)), msg, cert, key,
                rng=RandomSource(gen.getrandbits(64)),
            )
            # Independent bookkeeping: block at offset key mod (m + 1).
            offset = (int("".join(map(str, key.bits)), 2) if n else 0) % (m + 1)
            stream = list(msg[:offset]) + list(cert.bits) + list(msg[offset:])
            assert extract_stream(stream, list(range(offset, offset + n))) == (msg, cert)
            assert (got_msg, got_cert) == (msg, cert)
