//! Real transmission eigenvalues of a four-layer disc from the
//! separation-of-variables determinant, plus the determinant curves.

use invspec::transmission::{det_eigenvalues, det_eigenvalues_adaptive, det_scan, DetConfig, LayeredIndex};

fn main() -> invspec::Result<()> {
    let index = LayeredIndex::new(vec![2.4, 7.4, 8.1, 2.1], vec![0.25, 0.5, 0.75])?;

    let fixed = det_eigenvalues(&index, 4, 10.0, 6)?;
    println!("m = 0..4 : {:?}", fixed.values());
    println!("warnings : {:?}", fixed.warnings);

    let adaptive = det_eigenvalues_adaptive(&index, 4, 10.0, 6)?;
    for e in &adaptive.entries {
        println!("k = {:.6}  (m = {})", e.k, e.m);
    }

    // coarse look at D_0 near its first root
    let cfg = DetConfig { k_min: 2.3, k_step: 0.05, ..DetConfig::default() };
    for (k, d) in det_scan(&index, 0, 2.9, &cfg)? {
        println!("{k:.2} {d:+.3e}");
    }
    Ok(())
}
