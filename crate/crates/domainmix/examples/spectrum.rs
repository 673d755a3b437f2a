//! Split a small image into amplitude and phase spectra, then put it back
//! together and measure the round-trip error.

use domainmix::spectral::{decompose, fft2d, ifft2d, recompose};
use domainmix::ImageTensor;

fn main() {
    // a 4x4 grayscale ramp with one bright pixel
    let mut data: Vec<f64> = (0..16).map(|i| i as f64 * 0.5 / 15.0).collect();
    data[5] = 1.0;
    let image = ImageTensor::new(4, 4, 1, data).unwrap();

    let spectrum = fft2d(&image);
    let polar = decompose(&spectrum);

    // the (0,0) coefficient of an unnormalized transform is the pixel sum
    let pixel_sum: f64 = image.data().iter().sum();
    println!("DC amplitude {:.6}, pixel sum {:.6}", polar.amplitude()[0], pixel_sum);

    for (u, v) in [(0, 1), (1, 0), (2, 2)] {
        let i = u * image.width() + v;
        println!(
            "coefficient ({u},{v}): amplitude {:8.4}  phase {:8.4}",
            polar.amplitude()[i],
            polar.phase()[i]
        );
    }

    let back = ifft2d(&recompose(&polar).unwrap()).unwrap();
    println!("round-trip error {:.3e}", image.max_abs_diff(&back));
}
