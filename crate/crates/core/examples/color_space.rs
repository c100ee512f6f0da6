//! RGB to HSI conversion and back, per pixel and per image.

use fundus_sve::imaging::{hsi_pixel_to_rgb, hsi_to_rgb, rgb_pixel_to_hsi, rgb_to_hsi, RasterImage};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for rgb in [[180u8, 80, 40], [255, 255, 255], [10, 200, 90], [128, 128, 128]] {
        let (h, s, i) = rgb_pixel_to_hsi(rgb);
        let back = hsi_pixel_to_rgb(h, s, i);
        println!("{rgb:?} -> H {h:.2} deg, S {s:.4}, I {i:.4} -> {back:?}");
    }

    let img = RasterImage::from_fn(32, 32, |x, y| [(x * 8) as u8, (y * 8) as u8, 120])?;
    let hsi = rgb_to_hsi(&img);
    let mean_i = hsi.intensity().iter().sum::<f64>() / hsi.intensity().len() as f64;
    let back = hsi_to_rgb(&hsi);
    let worst = img
        .as_raw()
        .iter()
        .zip(back.as_raw())
        .map(|(a, b)| a.abs_diff(*b))
        .max()
        .unwrap_or(0);
    println!("32x32 gradient: mean intensity {mean_i:.3}, largest channel change after round trip {worst}");
    Ok(())
}
