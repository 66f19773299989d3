#!/usr/bin/env python3
"""
Tests for the numeric settings and per-run overrides
"""

import threading

import numpy as np
import pytest

from seqcore import WeightSequence
from settings import Settings, settings
from verdicts import Status, Variant, classify_series


def _custom_gevrey_one():
    return WeightSequence.custom(WeightSequence.gevrey(1.0).log_moments(np.arange(4097)))


def test_override_is_restored():
    before = settings.sigma_margin
    with settings.overridden(sigma_margin=0.2, rel_tol=None) as active:
        assert settings.sigma_margin == 0.2
        assert active.sigma_margin == 0.2
        assert settings.rel_tol == Settings.from_env().rel_tol
    assert settings.sigma_margin == before


def test_override_casts_to_field_type():
    with settings.overridden(default_p=512.0):
        assert settings.default_p == 512
        assert isinstance(settings.default_p, int)


def test_unknown_override_is_rejected():
    with pytest.raises(AttributeError):
        with settings.overridden(colour="red"):
            pass


def test_as_dict_lists_tolerances():
    values = settings.as_dict()
    assert values["contraction"] == settings.contraction
    assert values["extrapolation_tol"] == settings.extrapolation_tol
    assert "host" not in values


def test_override_in_one_thread_is_invisible_to_another():
    M = _custom_gevrey_one()
    # Korenbljum sigma = 2 / 2.08, inside the default band and outside a 0.02 one
    exponent = 1.0 / 2.08
    entered, release = threading.Event(), threading.Event()
    seen = {}

    def overriding_run():
        with settings.overridden(sigma_margin=0.02, tau_margin=2.0):
            seen["margin"] = settings.sigma_margin
            seen["status"] = classify_series(M, exponent, Variant.KORENBLJUM, 4096).status
            entered.set()
            release.wait(timeout=30)

    worker = threading.Thread(target=overriding_run)
    worker.start()
    try:
        assert entered.wait(timeout=30)
        assert settings.sigma_margin == Settings.from_env().sigma_margin
        assert classify_series(M, exponent, Variant.KORENBLJUM, 4096).status is Status.INCONCLUSIVE
    finally:
        release.set()
        worker.join()
    assert seen == {"margin": 0.02, "status": Status.DIVERGES}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
