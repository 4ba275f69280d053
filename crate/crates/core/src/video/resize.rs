use crate::error::Result;
use crate::video::frame::check_dimensions;
use crate::video::Frame;

/// Nearest-neighbor resize: output `(x, y)` samples input
/// `(x * in_w / out_w, y * in_h / out_h)` with integer floor division.
pub fn resize_nearest(frame: &Frame, out_w: u32, out_h: u32) -> Result<Frame> {
    check_dimensions(out_w, out_h)?;
    let (in_w, in_h) = frame.dimensions();
    if (in_w, in_h) == (out_w, out_h) {
        return Ok(frame.clone());
    }
    let src = frame.pixels();
    let x_map: Vec<usize> = (0..out_w as u64)
        .map(|x| (x * in_w as u64 / out_w as u64) as usize)
        .collect();
    let mut pixels = Vec::with_capacity((out_w * out_h) as usize);
    for y in 0..out_h as u64 {
        let sy = (y * in_h as u64 / out_h as u64) as usize;
        let row = &src[sy * in_w as usize..(sy + 1) * in_w as usize];
        pixels.extend(x_map.iter().map(|&sx| row[sx]));
    }
    let mut out = Frame::from_pixels(out_w, out_h, pixels)?;
    out.index = frame.index;
    out.capture_time = frame.capture_time;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::video::Pixel;

    fn two_by_two() -> Frame {
        Frame::from_pixels(
            2,
            2,
            vec![Pixel::gray(1), Pixel::gray(2), Pixel::gray(3), Pixel::gray(4)],
        )
        .unwrap()
    }

    #[test]
    fn identity_when_dimensions_match() {
        let f = two_by_two();
        assert_eq!(resize_nearest(&f, 2, 2).unwrap(), f);
    }

    #[test]
    fn downscale_to_single_pixel_takes_origin() {
        let out = resize_nearest(&two_by_two(), 1, 1).unwrap();
        assert_eq!(out.pixels(), &[Pixel::gray(1)]);
    }

    #[test]
    fn upscale_replicates_blocks() {
        let out = resize_nearest(&two_by_two(), 4, 4).unwrap();
        // enumerate the mapping for every output pixel
        for y in 0..4 {
            for x in 0..4 {
                let expected = 1 + (x / 2) + 2 * (y / 2);
                assert_eq!(out.get(x, y), Pixel::gray(expected as u8), "({x},{y})");
            }
        }
    }

    #[test]
    fn rejects_zero_output() {
        assert!(resize_nearest(&two_by_two(), 0, 3).is_err());
    }
}
