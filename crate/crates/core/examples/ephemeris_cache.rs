//! Precomputed star states on the 0.5 Myr grid, cached on disk.

use std::sync::Arc;
use std::time::Instant;

use galaxy_settler::catalog::{generate_synthetic, EphemerisGrid, SyntheticProfile};
use galaxy_settler::dynamics::RotationCurve;

fn main() -> galaxy_settler::error::Result<()> {
    let curve = Arc::new(RotationCurve::default_curve());
    let catalog = generate_synthetic(20_000, 2, &SyntheticProfile::default(), curve)?;
    let dir = std::env::temp_dir().join("galaxy-settler-ephemeris-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("ephemeris.bin");
    let _ = std::fs::remove_file(&path);

    let t = Instant::now();
    let built = EphemerisGrid::load_or_build(&path, &catalog)?;
    println!("built {} epochs x {} stars in {:?}", built.t_grid.len(), built.n_stars(), t.elapsed());
    let t = Instant::now();
    let loaded = EphemerisGrid::load_or_build(&path, &catalog)?;
    println!("reloaded from cache in {:?}", t.elapsed());
    assert_eq!(built.key(), loaded.key());

    let frame = loaded.frame_at(42.5).expect("grid epoch");
    let (p, _) = catalog.star_state(7, 42.5)?;
    println!("star 7 at 42.5 Myr: cache {:?}, direct {:?}", frame.position(catalog.index_of(7).expect("star 7")), p);
    Ok(())
}
