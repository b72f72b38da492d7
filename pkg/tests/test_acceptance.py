"""Acceptance gate: ten criteria, one PASS/FAIL line each.

Each test delegates to the corresponding suite check (the same code the
`amcmc suite` command runs) and prints a single verdict line.
"""
import pytest

from amcmc import suites

SEED = 0


def run(check, label):
    result = check(seed=SEED)
    verdict = "PASS" if result.passed else "FAIL"
    print(f"{label}: {verdict}")
    assert result.passed, f"{label} failed: {result.details}"


def test_criterion_01_counterexample_stationary_law():
    run(suites.check_counterexample, "criterion 01 counterexample")


def test_criterion_02_irmcmc_exact_rate():
    run(suites.check_irmcmc_rate, "criterion 02 irmcmc exact 1/n rate")


def test_criterion_03_reservoir_bias_bounds():
    run(suites.check_bn_bounds, "criterion 03 reservoir bias bounds")


def test_criterion_04_frozen_kernel_invariant_law():
    run(suites.check_pi_theta, "criterion 04 frozen-kernel invariant law")


def test_criterion_05_ee_rate_bound():
    run(suites.check_ee_rate, "criterion 05 ee sqrt-n rate bound")


def test_criterion_06_ladder():
    run(suites.check_ladder, "criterion 06 multi-level resampling ladder")


def test_criterion_07_ergodic_mse_bounded():
    run(suites.check_ergodic_mse, "criterion 07 ergodic mse bounded")


def test_criterion_08_sampler_kernel_conformance():
    run(suites.check_conformance, "criterion 08 sampler-kernel conformance")


def test_criterion_09_independent_metropolis_invariance():
    run(suites.check_im_invariance, "criterion 09 independent-MH invariance")


def test_criterion_10_diagnostics_sanity():
    run(suites.check_diagnostics, "criterion 10 diagnostics sanity")
