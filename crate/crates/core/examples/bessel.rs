//! Bessel functions of integer order: a few values, the Wronskian, and the
//! first zero of J_0 by bisection.

use std::f64::consts::PI;

use invspec::specfun::{bessel_j, bessel_j_with_deriv, bessel_y_with_deriv};

fn main() -> invspec::Result<()> {
    println!("{:>6} {:>4} {:>22} {:>22} {:>10}", "x", "m", "J_m(x)", "Y_m(x)", "wronskian");
    for x in [0.5, 2.0, 10.0, 50.0] {
        for m in [0, 1, 5] {
            let j = bessel_j_with_deriv(m, x)?;
            let y = bessel_y_with_deriv(m, x)?;
            let w = j.value * y.deriv - j.deriv * y.value;
            let rel = (w - 2.0 / (PI * x)).abs() / (2.0 / (PI * x));
            println!("{x:>6} {m:>4} {:>22.15e} {:>22.15e} {rel:>10.1e}", j.value, y.value);
        }
    }

    let (mut lo, mut hi) = (2.0, 3.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if bessel_j(0, lo)?.signum() == bessel_j(0, mid)?.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!("first zero of J_0: {:.15}", 0.5 * (lo + hi));
    Ok(())
}
