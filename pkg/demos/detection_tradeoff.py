"""Detection probability under direction mismatch.

The detector is always built for the assumed (nominal) direction; the
actual target sits at 25 degrees. Sweeping the assumed direction shows
how the two designs degrade as the assumption drifts from the truth.
"""

import numpy as np

from mimowave import detection, mm, model

TRUE_DOA = 25.0
P_FA = 1e-2
TRIALS = 20_000

print(f"true target at {TRUE_DOA} deg, Pfa = {P_FA}, {TRIALS} trials per cell")
print("\nassumed  mismatch  Pd(designed)  Pd(baseline)")

for assumed in (25.0, 22.0, 19.0, 16.0, 13.0, 10.0):
    scenario = model.desk_scenario(seed=7, nominal_doa_deg=assumed)
    prior = model.build_prior(scenario)
    trace = mm.optimize(scenario, prior)
    h_nominal = model.response_matrix(
        [(scenario.nominal_amplitude, assumed)], scenario)
    x_nominal = mm.nominal_design(h_nominal, scenario.energy_budget,
                                  scenario.code_length)

    h_true = complex(scenario.nominal_amplitude) * np.kron(
        model.steering(scenario.rx, TRUE_DOA),
        model.steering(scenario.tx, TRUE_DOA))

    pds = []
    for i, x in enumerate((trace.waveform, x_nominal)):
        spec = detection.build_detector(x, prior, scenario.noise_power)
        gamma = detection.calibrate_threshold(
            spec, P_FA, TRIALS, np.random.default_rng([7, int(assumed), i]))
        spec = spec.with_threshold(gamma)
        pds.append(detection.detection_probability(
            spec, h_true, TRIALS, np.random.default_rng([7, int(assumed), 10 + i])))

    print(f"{assumed:7.0f}  {abs(assumed - TRUE_DOA):8.0f}  "
          f"{pds[0]:12.4f}  {pds[1]:12.4f}")

print("\nAt zero mismatch both designs detect essentially always; as the"
      "\nassumption drifts, detection hinges on how much energy the design"
      "\nstill places near the true direction. With the wide-spaced transmit"
      "\narray the decay is not monotone: sidelobes of the pattern can land"
      "\non the true direction for some assumed angles and miss for others.")
