//! Round-trips a pool through a pool file, the format a dump of real
//! x-vectors would use, and shows a malformed file being rejected.
//!
//! ```bash
//! cargo run --release -p xvlab --example ingest_pool -- [pool.csv]
//! ```

use std::path::PathBuf;

use xvlab::harness::{ingest_pool, write_pool, PoolSummary};
use xvlab::{generate_world, Result, SimParams};

fn main() -> Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("xvlab-example-pool.csv"));

    let world = generate_world(&SimParams::default())?;
    write_pool(&world.pool, &path)?;
    let pool = ingest_pool(&path)?;
    println!("wrote and read back {}", path.display());
    print!("{}", PoolSummary::of(&pool).to_csv());
    println!("identical to the generated pool: {}", pool == world.pool);

    let bad = std::env::temp_dir().join("xvlab-example-bad.csv");
    std::fs::write(&bad, "dim=3\nspk,M,u,1,2,3\nspk,F,u,1,2\n").map_err(|e| xvlab::Error::Io {
        path: bad.clone(),
        source: e,
    })?;
    match ingest_pool(&bad) {
        Ok(_) => println!("unexpectedly accepted {}", bad.display()),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
