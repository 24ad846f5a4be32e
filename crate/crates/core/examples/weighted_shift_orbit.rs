// `T_alpha^n` of a short polynomial: the closed form against repeated
// single steps, and how the weight changes the coefficients.

use num_complex::Complex64;
use tsl::{CoefficientSeries, ShiftParams};

pub fn run() -> tsl::Result<()> {
    let f = CoefficientSeries::from_real(&[1.0, -2.0, 0.5, 3.0, 1.0, -1.0, 0.25, 2.0])?;
    for alpha in [-1.0, 0.0, 0.5, 2.0] {
        let params = ShiftParams::new(alpha)?;
        let closed = f.apply_shift_power(3, params);
        let stepped = f.apply_shift(params).apply_shift(params).apply_shift(params);
        let gap = closed
            .coefficients()
            .iter()
            .zip(stepped.coefficients())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let head: Vec<String> = closed.coefficients()[..5].iter().map(|c| format!("{:.4}", c.re)).collect();
        println!("alpha {alpha:>4}: T^3 f = [{}] (closed vs stepped {gap:.1e})", head.join(", "));
    }

    let params = ShiftParams::new(1.0)?;
    let z = Complex64::new(0.3, 0.4);
    println!("T f(z) at z = {z}: {:.6}", f.apply_shift(params).evaluate(z));
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
