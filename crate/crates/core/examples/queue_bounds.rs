//! Waiting-time bounds for the last of ten customers from one sample of
//! service and interarrival times, against simulation.

use bayes_robust::distributions::RandomSource;
use bayes_robust::queueing::{bayes_waiting_bound, kingman_from_samples, simulate_queue, QueueModel};
use bayes_robust::robust_solver::lower_order_statistic;

fn main() -> bayes_robust::Result<()> {
    let model = QueueModel::default();
    let src = RandomSource::new(21, 0);
    for n in [100, 1000, 10_000] {
        let x = model.service()?.sample(n, &src.child(2 * n as u64))?;
        let t = model.interarrival()?.sample(n, &src.child(2 * n as u64 + 1))?;
        let b = bayes_waiting_bound(&model, &x, &t, 0.1)?;
        let k = kingman_from_samples(&x, &t, model.eps_bar)?;
        let s = b.service_interval.unwrap();
        println!("N = {n:>5}: bayes box {:.3} (service mean in [{:.3}, {:.3}]), kingman {:.3}", b.value, s.lo, s.hi, k.value);
    }
    let waits = simulate_queue(&model, 200_000, &src.child(99))?;
    let median = lower_order_statistic(&waits, 1.0 - model.eps_bar)?;
    let q95 = lower_order_statistic(&waits, 0.95)?;
    let idle = waits.iter().filter(|w| **w == 0.0).count() as f64 / waits.len() as f64;
    println!("simulated W_10: median {median:.3}, 95% quantile {q95:.3}, P(no wait) {idle:.3}");
    Ok(())
}
