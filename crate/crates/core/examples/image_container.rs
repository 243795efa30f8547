//! Save and reload the raw container (`.json` sidecar plus `.raw` f32
//! payload).
//!
//! ```bash
//! cargo run --example image_container -- /tmp/slice
//! ```

use ctnoise::{load_image, save_image, Image, Meta};

fn main() -> ctnoise::Result<()> {
    let stem = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("ctnoise-slice").display().to_string());

    let img = Image::from_fn(64, 32, |x, y| -1000.0 + 30.0 * x as f64 + y as f64)?
        .with_meta(Meta { mas: Some(48.0), slice_id: Some("slice-017".into()) });
    save_image(&img, &stem)?;

    let back = load_image(&stem)?;
    println!("{}x{} mas={:?} slice={:?}", back.width(), back.height(), back.meta().mas, back.meta().slice_id);
    println!("identical: {}", back == img);
    println!("{}", std::fs::read_to_string(format!("{stem}.json")).map_err(|e| ctnoise::Error::InvalidParams(e.to_string()))?);
    Ok(())
}
