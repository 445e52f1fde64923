from smrls.harness.montecarlo import (
    AggregateResult,
    RunManifest,
    run_monte_carlo,
    compare_replica_mc,
    trial_rng,
)
