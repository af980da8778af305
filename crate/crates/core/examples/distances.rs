//! Cosine and l2 distance, pool construction and gender filtering.
//!
//! ```bash
//! cargo run -p xvlab --example distances
//! ```

use xvlab::{cosine_distance, filter_by_gender, l2_distance, mean_vector, Gender, PoolEntry, Result, XVector, XVectorPool};

fn main() -> Result<()> {
    let a = XVector::new(vec![1.0, 0.0, 0.0])?;
    let b = XVector::new(vec![0.0, 2.0, 0.0])?;
    let c = XVector::new(vec![-3.0, 0.0, 0.0])?;

    // cosine distance ignores scale, l2 does not
    println!("cos(a, b) = {}  l2(a, b) = {:.4}", cosine_distance(&a, &b)?, l2_distance(&a, &b)?);
    println!("cos(a, c) = {}  l2(a, c) = {}", cosine_distance(&a, &c)?, l2_distance(&a, &c)?);
    println!("cos(a, 5a) = {}", cosine_distance(&a, &a.scaled(5.0))?);
    println!("mean(a, b, c) = {:?}", mean_vector([&a, &b, &c])?.as_slice());

    let pool = XVectorPool::new(
        3,
        vec![
            PoolEntry::new("spk1", "u1", Gender::Male, a)?,
            PoolEntry::new("spk2", "u1", Gender::Female, b)?,
            PoolEntry::new("spk3", "u1", Gender::Male, c)?,
        ],
    )?;
    let male = filter_by_gender(&pool, Gender::Male);
    println!("{} entries, {} male", pool.len(), male.len());
    for (index, entry) in male.iter() {
        // filtering keeps each entry's index in the full pool
        println!("  original index {index}: {}", entry.speaker_id);
    }

    if let Err(e) = cosine_distance(&XVector::zeros(3), &pool.entries()[0].vector) {
        println!("zero vector: {e}");
    }
    Ok(())
}
