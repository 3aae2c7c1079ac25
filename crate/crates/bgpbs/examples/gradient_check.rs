//! Verify the hand-written backpropagation against finite differences.
//!
//! The autoencoder's gradients are derived and coded by hand, so they get
//! the classic numerical audit: perturb every parameter by a small step,
//! compare the central-difference slope of the loss with the analytic
//! gradient, and report the worst elementwise relative error. Anything
//! near 1e-4 or below means the chain rule survived the implementation.
//!
//! ```bash
//! cargo run --release --example gradient_check
//! ```

use bgpbs::autoencoder::{AutoencoderParams, ModelDims};
use bgpbs::Mat;
use bgpbs::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_overall: f64 = 0.0;

    println!("instance  dims (D,W,H)  params  max relative error");
    for instance in 0..10 {
        // The latent state must be narrower than the flattened window, so
        // dimension triples are resampled until they form a bottleneck.
        let dims = loop {
            let dims = ModelDims {
                input_dim: rng.gen_range(1..=4),
                window: rng.gen_range(2..=5),
                hidden_dim: rng.gen_range(2..=6),
            };
            if dims.hidden_dim < dims.window * dims.input_dim {
                break dims;
            }
        };
        let params = AutoencoderParams::init(dims, &mut rng)?;
        let window = Mat::from_fn(dims.window, dims.input_dim, |_, _| rng.gen_range(-1.5..1.5));

        let (_, analytic) = params.loss_and_gradient(&window)?;
        let theta = params.to_vec();

        let mut worst = 0.0f64;
        for i in 0..theta.len() {
            let mut plus = theta.clone();
            plus[i] += STEP;
            let mut minus = theta.clone();
            minus[i] -= STEP;
            let loss_plus = AutoencoderParams::from_vec(dims, &plus)?
                .loss_and_gradient(&window)?
                .0;
            let loss_minus = AutoencoderParams::from_vec(dims, &minus)?
                .loss_and_gradient(&window)?
                .0;
            let numeric = (loss_plus - loss_minus) / (2.0 * STEP);
            // The scale floor keeps finite-difference roundoff (absolute
            // noise near 1e-10) from dominating on near-zero components.
            let scale = analytic[i].abs().max(numeric.abs()).max(1e-5);
            worst = worst.max((analytic[i] - numeric).abs() / scale);
        }
        worst_overall = worst_overall.max(worst);
        println!(
            "{instance:>8}  ({},{},{})       {:>6}  {worst:.3e}",
            dims.input_dim,
            dims.window,
            dims.hidden_dim,
            theta.len()
        );
    }

    println!("\nworst relative error across all instances: {worst_overall:.3e}");
    assert!(worst_overall < 1e-4);
    println!("analytic BPTT agrees with central finite differences.");
    Ok(())
}
