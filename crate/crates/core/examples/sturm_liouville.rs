//! Lowest Neumann eigenvalues of `-y'' + q y = λ y` for the symmetric
//! potentials `q = 1 - exp(b (x - 1/2)²)`.

use invspec::sturm::{sl_eigenvalues, RobinBc, SymmetricPotential};

fn main() -> invspec::Result<()> {
    for b in [-20.0, -5.0, 0.0, 5.0, 20.0] {
        let s = sl_eigenvalues(&SymmetricPotential::new(b), RobinBc::NEUMANN, 5)?;
        let row: Vec<String> = s.eigenvalues.iter().map(|v| format!("{v:12.6}")).collect();
        println!("b = {b:6.1}: {}", row.join(" "));
    }

    // Robin conditions shift the spectrum of the flat potential up
    let robin = sl_eigenvalues(&SymmetricPotential::new(0.0), RobinBc::new(1.0, 1.0), 3)?;
    println!("b = 0, h = H = 1: {:?}", robin.eigenvalues);
    Ok(())
}
