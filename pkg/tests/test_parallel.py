from __future__ import annotations

import pytest

from causal_locus.parallel import THREADS_ENV, sweep, thread_limit


class TestSweep:
    def test_order_preserved(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "4")
        assert sweep(lambda v: v * v, range(50)) == [v * v for v in range(50)]

    def test_serial_and_parallel_agree(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "1")
        serial = sweep(lambda v: v / 3.0, range(20))
        monkeypatch.setenv(THREADS_ENV, "8")
        assert sweep(lambda v: v / 3.0, range(20)) == serial

    def test_thread_limit(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "3")
        assert thread_limit() == 3
        monkeypatch.delenv(THREADS_ENV)
        assert thread_limit() >= 1
        for bad in ("0", "-2", "many"):
            monkeypatch.setenv(THREADS_ENV, bad)
            with pytest.raises(ValueError):
                thread_limit()
