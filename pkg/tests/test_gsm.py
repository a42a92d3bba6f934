"""Unit tests for the GSM link model and exhaustive MLD."""

import math

import numpy as np
import pytest

from app.core.exceptions import (
    CodebookError,
    ConfigurationError,
    DemappingError,
    VariableCountMismatchError,
)
from app.core.gsm import (
    ApCodebook,
    Constellation,
    GsmConfig,
    build_ap_codebook,
    candidate_metrics,
    classical_mld,
    constellation_points,
    demap,
    demap_symbol,
    draw_channel,
    format_ap_table,
    int_to_bits,
    map_symbol,
    max_codebook_size,
    parse_ap_table,
    synthesize,
)

R2 = 1 / math.sqrt(2)
R10 = 1 / math.sqrt(10)


class TestConstellations:
    def test_bpsk_zero(self) -> None:
        assert map_symbol((0,), Constellation.BPSK) == pytest.approx(complex(R2, R2))

    def test_bpsk_one(self) -> None:
        assert map_symbol((1,), Constellation.BPSK) == pytest.approx(complex(-R2, -R2))

    def test_qpsk_points(self) -> None:
        assert map_symbol((0, 1), Constellation.QPSK) == pytest.approx(complex(R2, -R2))
        assert map_symbol((1, 0), Constellation.QPSK) == pytest.approx(complex(-R2, R2))

    def test_qam16_point(self) -> None:
        """(1,0,1,0) maps to (-3+j)/sqrt(10)."""
        assert map_symbol((1, 0, 1, 0), Constellation.QAM16) == pytest.approx(
            complex(-3, 1) * R10
        )

    @pytest.mark.parametrize("constellation", list(Constellation))
    def test_unit_average_energy(self, constellation: Constellation) -> None:
        points = constellation_points(constellation)
        assert len(points) == constellation.size
        assert float(np.mean(np.abs(points) ** 2)) == pytest.approx(1.0, abs=1e-12)

    def test_wrong_bit_count_raises(self) -> None:
        with pytest.raises(VariableCountMismatchError):
            map_symbol((0, 1, 0), Constellation.QPSK)

    def test_aliases(self) -> None:
        assert Constellation("16QAM") is Constellation.QAM16
        assert Constellation("16-qam") is Constellation.QAM16
        assert Constellation("qpsk") is Constellation.QPSK

    def test_demap_symbol_inverse(self) -> None:
        assert demap_symbol(complex(R2, -R2), Constellation.QPSK) == (0, 1)
        for c in Constellation:
            for i in range(c.size):
                bits = int_to_bits(i, c.bits_per_symbol)
                assert demap_symbol(map_symbol(bits, c), c) == bits

    def test_demap_symbol_off_alphabet(self) -> None:
        with pytest.raises(DemappingError):
            demap_symbol(0.2 + 0.1j, Constellation.QPSK)


class TestCodebook:
    def test_cyclic_table_rows(self) -> None:
        codebook = build_ap_codebook(4, 3, 4, "cyclic")
        assert codebook.patterns == ((0, 1, 2), (1, 2, 3), (2, 3, 0), (3, 0, 1))
        expected = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0]])
        np.testing.assert_array_equal(codebook.matrix(0), expected)

    def test_bit_sequence_10_is_pattern_2(self) -> None:
        codebook = build_ap_codebook(4, 3, 4)
        assert codebook.patterns[0b10] == (2, 3, 0)

    def test_format_matches_mapping_table(self) -> None:
        rendered = format_ap_table(build_ap_codebook(4, 3, 4))
        assert rendered.splitlines() == [
            "bits | antennas | matrix",
            "00 | (0, 1, 2) | [1 0 0; 0 1 0; 0 0 1; 0 0 0]",
            "01 | (1, 2, 3) | [0 0 0; 1 0 0; 0 1 0; 0 0 1]",
            "10 | (2, 3, 0) | [0 0 1; 0 0 0; 1 0 0; 0 1 0]",
            "11 | (3, 0, 1) | [0 1 0; 0 0 1; 0 0 0; 1 0 0]",
        ]

    def test_lex_single_antenna(self) -> None:
        codebook = build_ap_codebook(4, 1, 4, "lex")
        assert codebook.patterns == ((0,), (1,), (2,), (3,))

    def test_every_column_has_one_active_antenna(self) -> None:
        cyclic = build_ap_codebook(8, 3, 8, "cyclic")
        lex = build_ap_codebook(6, 3, 16, "lex")
        for codebook in (cyclic, lex):
            assert np.all(codebook.matrices.sum(axis=1) == 1)

    def test_cyclic_rule_limited_to_n_tx_patterns(self) -> None:
        """C(8,2) = 28 allows Q = 16, but only 8 cyclic shifts exist."""
        GsmConfig(8, 8, 2, 16)
        with pytest.raises(CodebookError, match="lex"):
            build_ap_codebook(8, 2, 16, "cyclic")
        assert len(build_ap_codebook(8, 2, 16, "lex").patterns) == 16

    def test_q_exceeding_binomial_rejected(self) -> None:
        """C(4,3) = 4 so Q = 8 is impossible."""
        assert max_codebook_size(4, 3) == 4
        with pytest.raises(ConfigurationError):
            build_ap_codebook(4, 3, 8)

    def test_q_must_be_power_of_two(self) -> None:
        with pytest.raises(ConfigurationError):
            GsmConfig(4, 4, 2, 3)

    def test_explicit_table(self, tmp_path) -> None:
        table = tmp_path / "ap.txt"
        table.write_text("# four patterns\n0,1\n2,3\n0,2\n1,3\n", encoding="utf-8")
        codebook = build_ap_codebook(4, 2, 4, "explicit-table", table_path=table)
        assert codebook.patterns == ((0, 1), (2, 3), (0, 2), (1, 3))

    def test_explicit_table_repeated_set_rejected(self) -> None:
        with pytest.raises(CodebookError):
            build_ap_codebook(4, 2, 2, "explicit-table", patterns=[(0, 1), (1, 0)])

    def test_explicit_table_wrong_length_rejected(self) -> None:
        with pytest.raises(CodebookError):
            build_ap_codebook(4, 2, 4, "explicit-table", patterns=parse_ap_table("0,1\n2,3\n"))

    def test_antenna_out_of_range_rejected(self) -> None:
        with pytest.raises(CodebookError):
            ApCodebook(((0, 1), (2, 4)), 4)


class TestSynthesis:
    def test_same_seed_is_deterministic(self, reference_link, reference_codebook) -> None:
        frame_a, chan_a = synthesize(reference_link, reference_codebook, 99)
        frame_b, chan_b = synthesize(reference_link, reference_codebook, 99)
        assert frame_a == frame_b
        np.testing.assert_array_equal(chan_a.h, chan_b.h)
        np.testing.assert_array_equal(chan_a.y, chan_b.y)

    def test_zero_noise_signal(self, reference_link, reference_codebook) -> None:
        frame, chan = synthesize(reference_link, reference_codebook, 5, noise_var=0.0)
        codeword = reference_codebook.matrix(frame.ap_index) @ np.array(frame.symbols)
        np.testing.assert_allclose(chan.y, chan.h @ codeword, atol=1e-14)

    def test_symbols_follow_bits(self, reference_link, reference_codebook) -> None:
        frame, _ = synthesize(reference_link, reference_codebook, 17)
        for k, symbol in enumerate(frame.symbols):
            bits = frame.bits_symbols[2 * k : 2 * k + 2]
            assert symbol == map_symbol(bits, Constellation.QPSK)

    def test_noise_variance_follows_snr(self) -> None:
        assert GsmConfig(4, 4, 3, 4, snr_db=0.0).noise_var == pytest.approx(1.0)
        assert GsmConfig(4, 4, 3, 4, snr_db=10.0).noise_var == pytest.approx(0.1)

    def test_channel_entries_have_unit_variance(self) -> None:
        h = draw_channel(np.random.default_rng(1), 1000, 100)
        assert float(np.mean(np.abs(h) ** 2)) == pytest.approx(1.0, abs=0.02)

    def test_empirical_snr(self, reference_codebook) -> None:
        """Noise power over 10^4 frames matches sigma_s^2 / rho within 5%."""
        cfg = GsmConfig(4, 4, 3, 4, snr_db=3.0)
        power = []
        for seed in range(10_000):
            frame, chan = synthesize(cfg, reference_codebook, seed)
            signal = chan.h @ (reference_codebook.matrix(frame.ap_index) @ np.array(frame.symbols))
            power.append(np.mean(np.abs(chan.y - signal) ** 2))
        rho = 1.0 / float(np.mean(power))
        assert rho == pytest.approx(10 ** 0.3, rel=0.05)


class TestClassicalMld:
    def test_evaluation_count(self, reference_link, reference_codebook) -> None:
        _, chan = synthesize(reference_link, reference_codebook, 0)
        assert classical_mld(chan, reference_link, reference_codebook).n_evaluations == 256

    def test_metric_is_global_minimum(self, reference_link, reference_codebook) -> None:
        _, chan = synthesize(reference_link, reference_codebook, 3)
        estimate = classical_mld(chan, reference_link, reference_codebook)
        metrics = candidate_metrics(chan, reference_link, reference_codebook)
        assert estimate.metric == metrics.min()
        assert not np.any(metrics < estimate.metric)

    def test_metric_matches_direct_norm(self, reference_link, reference_codebook) -> None:
        _, chan = synthesize(reference_link, reference_codebook, 8)
        est = classical_mld(chan, reference_link, reference_codebook)
        codeword = reference_codebook.matrix(est.ap_index) @ np.array(est.symbols)
        direct = float(np.sum(np.abs(chan.y - chan.h @ codeword) ** 2))
        assert est.metric == pytest.approx(direct, abs=1e-12)

    def test_zero_noise_recovers_frame(self, reference_link, reference_codebook) -> None:
        for seed in range(20):
            frame, chan = synthesize(reference_link, reference_codebook, seed, noise_var=0.0)
            est = classical_mld(chan, reference_link, reference_codebook)
            assert est.ap_index == frame.ap_index
            np.testing.assert_allclose(est.symbols, frame.symbols, atol=1e-12)
            assert est.metric == pytest.approx(0.0, abs=1e-20)


class TestDemap:
    def test_pattern_to_bits(self, reference_link, reference_codebook) -> None:
        symbols = [complex(R2, R2)] * 3
        _, bits_ap = demap(symbols, (3, 0, 1), reference_codebook, reference_link)
        assert bits_ap == (1, 1)

    def test_round_trip_over_all_frames(self, reference_link, reference_codebook) -> None:
        for value in range(256):
            bits = int_to_bits(value, reference_link.frame_bits)
            bits_symbols, bits_ap = bits[:6], bits[6:]
            symbols = [map_symbol(bits_symbols[2 * k : 2 * k + 2], "QPSK") for k in range(3)]
            pattern = reference_codebook.patterns[int("".join(map(str, bits_ap)), 2)]
            decoded = demap(symbols, pattern, reference_codebook, reference_link)
            assert decoded == (bits_symbols, bits_ap)

    def test_unknown_pattern_raises(self, reference_link, reference_codebook) -> None:
        with pytest.raises(DemappingError):
            demap([complex(R2, R2)] * 3, (0, 2, 1), reference_codebook, reference_link)
