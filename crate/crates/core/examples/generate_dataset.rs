//! Sweeps the reduced Sturm–Liouville grid, saves it with its manifest, and
//! reads it back.

use invspec::dataset::{generate, load, save, shuffle_split, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = GridSpec::sl_desk();
    let generated = generate(&spec)?;
    let dir = std::env::temp_dir().join("invspec-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("sl_desk.csv");
    let manifest = save(&generated.data, &path, &generated.manifest(&spec))?;
    println!("{} samples, checksum {}", manifest.samples, manifest.checksum);

    let (data, _) = load(&path)?;
    let (train, validate) = shuffle_split(&data, 0.7, 1)?;
    println!("first row: {:?} -> {:?}", data.features[0], &data.targets[0][..3]);
    println!("split: {} train / {} validate", train.len(), validate.len());
    Ok(())
}
