use decofield_cli::parallel::integrate_many_parallel;
use decofield_core::decoherence::RateContext;
use decofield_core::model::{CatStateSpec, FieldModel, NoiseModel};
use decofield_core::purity::PurityCurveIntegrand;
use decofield_core::qmc::FaureConfig;
use decofield_core::Complex64;
use std::time::Instant;

fn main() {
    let model = FieldModel::dimensionless(32, 0.01).unwrap();
    let noise = NoiseModel::new(1.0, 0.32, 1.0).unwrap();
    let ctx = RateContext::new(model, noise).unwrap();
    let state = CatStateSpec::new(Complex64::new(2.0, 2.0), Complex64::new(-2.0, -2.0)).unwrap();
    let times: Vec<f64> = (0..20).map(|i| 20.0 * i as f64 / 19.0).collect();
    let cfg = FaureConfig::new(64).unwrap();
    // warm up with a small run, then time a 2^13 slice and extrapolate
    let t0 = Instant::now();
    let integrand = PurityCurveIntegrand::new(&ctx, state, &times).unwrap();
    let est = integrate_many_parallel(&integrand, &cfg, 1 << 13, 1).unwrap();
    let el = t0.elapsed().as_secs_f64();
    println!("2^13 points: {el:.2} s -> extrapolated 2^16: {:.1} s", el * 8.0);
    println!("p(0) = {} +- {}", est[0].value, est[0].error_estimate);
    println!("p(20/19) = {} +- {}", est[1].value, est[1].error_estimate);
    println!("p(20) = {} +- {}", est[19].value, est[19].error_estimate);
}
