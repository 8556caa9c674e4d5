//! Radial spectral-Galerkin eigenvalues against the determinant roots as the
//! basis grows.

use invspec::transmission::{det_eigenvalues, galerkin_eigenvalues, LayeredIndex};

fn main() -> invspec::Result<()> {
    let cases = [
        ("homogeneous n = 4", LayeredIndex::homogeneous(4.0, 4)?),
        ("(2.4, 7.4, 8.1, 2.1)", LayeredIndex::new(vec![2.4, 7.4, 8.1, 2.1], vec![0.25, 0.5, 0.75])?),
    ];
    for (name, index) in &cases {
        let exact = det_eigenvalues(index, 4, 10.0, 6)?.values();
        println!("{name}: det {exact:.5?}");
        for n_r in [8, 12, 16, 20] {
            let g = galerkin_eigenvalues(index, 4, n_r, 6)?.values();
            let err = g.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            println!("  n_r = {n_r:2}  max error {err:.3e}");
        }
    }
    Ok(())
}
