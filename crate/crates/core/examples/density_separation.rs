// The set `E_gamma` carries positive `beta^gamma` density but its
// `beta^{gamma/2}` prefix ratios fall toward zero along `N = 2^j`.

use tsl::densities::{density_profile, dyadic_checkpoints, separating_set};

pub fn run() -> tsl::Result<()> {
    let horizon = 1u64 << 18;
    let gamma = 0.5;
    let set = separating_set(gamma, horizon)?;
    let checkpoints = dyadic_checkpoints(8, horizon);
    let own = density_profile(&set, gamma, &checkpoints)?;
    let half = density_profile(&set, gamma / 2.0, &checkpoints)?;
    println!("|E| = {} below {horizon}", set.len());
    println!("{:>8} {:>12} {:>12}", "N", "gamma", "gamma/2");
    for (a, b) in own.iter().zip(&half) {
        println!("{:>8} {:>12.6} {:>12.6}", a.n, a.ratio, b.ratio);
    }
    println!("limit for gamma: {:.6}", 1.0 - (-gamma).exp());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
