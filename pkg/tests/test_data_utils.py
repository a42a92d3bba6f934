"""Unit tests for config-file and range parsing."""

import pytest

from app.core.exceptions import ConfigurationError
from app.services.data_utils import load_key_value_file, parse_int_range, parse_key_value_text


class TestKeyValueText:
    def test_comments_and_key_folding(self) -> None:
        text = "# link\nN-TX = 4\nsnr_db: 3.5  # dB\n\nconstellation=QPSK\n"
        assert parse_key_value_text(text) == {
            "n_tx": "4",
            "snr_db": "3.5",
            "constellation": "QPSK",
        }

    def test_later_key_wins(self) -> None:
        assert parse_key_value_text("trials = 1\ntrials = 2\n") == {"trials": "2"}

    def test_missing_value(self) -> None:
        with pytest.raises(ConfigurationError, match="line 2"):
            parse_key_value_text("trials = 1\nseed =\n")

    def test_missing_file(self, tmp_path) -> None:
        with pytest.raises(ConfigurationError):
            load_key_value_file(tmp_path / "absent.cfg")


class TestIntRange:
    @pytest.mark.parametrize(
        ("raw", "expected"),
        [
            (5, [5]),
            ("1-8", [1, 2, 3, 4, 5, 6, 7, 8]),
            ("2,4,16", [2, 4, 16]),
            ("1-3,8,2", [1, 2, 3, 8]),
            ("-2", [-2]),
        ],
    )
    def test_accepted_forms(self, raw, expected) -> None:
        assert parse_int_range(raw) == expected

    @pytest.mark.parametrize("raw", ["", "a-b", "8-1", ","])
    def test_rejected_forms(self, raw) -> None:
        with pytest.raises(ConfigurationError):
            parse_int_range(raw)
