//! Write an embedding file, read it back, and take the difference of two
//! direction rows. The binary format stores float32 rows with u32 labels
//! behind an `EMB1` magic header.

use domainmix::io::{read_emb, semantic_shift, write_emb};
use domainmix::vmf::UnitVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let source = UnitVector::normalize(vec![1.0, 2.0, 0.0, 0.5])?;
    let target = UnitVector::normalize(vec![0.0, 1.0, 1.0, 0.5])?;

    let path = std::env::temp_dir().join("domainmix_pair.emb");
    let features: Vec<f64> = source
        .values()
        .iter()
        .chain(target.values())
        .copied()
        .collect();
    write_emb(&path, 4, 2, &features, &[0, 1])?;

    let file = read_emb(&path)?;
    println!("{} rows of dimension {}", file.n(), file.dim);

    // the stored rows went through float32, the shift is computed on what
    // a consumer would actually read
    let shift = semantic_shift(&file.features[..4], &file.features[4..])?;
    let norm: f64 = shift.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!("shift {shift:.4?}");
    println!("shift norm {norm:.4}");
    Ok(())
}
