use crate::error::{LeapError, Result};
use crate::video::{Frame, Pixel};

/// One beat of a pixel stream: a pixel plus start-of-frame and end-of-line sidebands.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamToken {
    pub pixel: Pixel,
    pub sof: bool,
    pub eol: bool,
}

/// Serializes a frame in raster order, flagging the first pixel and every row end.
pub fn tokenize(frame: &Frame) -> Vec<StreamToken> {
    let w = frame.width() as usize;
    frame
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &pixel)| StreamToken {
            pixel,
            sof: i == 0,
            eol: i % w == w - 1,
        })
        .collect()
}

/// Reassembles a frame from tokens, checking the sideband flags.
pub fn detokenize(tokens: &[StreamToken], width: u32, height: u32) -> Result<Frame> {
    let expected = width as usize * height as usize;
    if tokens.len() != expected {
        return Err(LeapError::Framing(format!(
            "{} tokens for a {width}x{height} frame",
            tokens.len()
        )));
    }
    let w = width as usize;
    for (i, t) in tokens.iter().enumerate() {
        if t.sof != (i == 0) {
            return Err(LeapError::Framing(format!("unexpected sof flag at token {i}")));
        }
        if t.eol != (i % w == w - 1) {
            return Err(LeapError::Framing(format!("unexpected eol flag at token {i}")));
        }
    }
    Frame::from_pixels(width, height, tokens.iter().map(|t| t.pixel).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn tokenize_round_trip(w in 1u32..20, h in 1u32..20, salt in any::<u8>()) {
            let pixels = (0..w * h).map(|i| Pixel::new(i as u8, salt, (i as u8) ^ salt)).collect();
            let f = Frame::from_pixels(w, h, pixels).unwrap();
            let tokens = tokenize(&f);
            prop_assert_eq!(tokens.len(), (w * h) as usize);
            prop_assert_eq!(tokens.iter().filter(|t| t.sof).count(), 1);
            prop_assert_eq!(tokens.iter().filter(|t| t.eol).count(), h as usize);
            prop_assert_eq!(detokenize(&tokens, w, h).unwrap(), f);
        }
    }

    #[test]
    fn detokenize_rejects_bad_flags() {
        let f = Frame::new(3, 2, Pixel::BLACK).unwrap();
        let mut tokens = tokenize(&f);
        tokens[4].sof = true;
        assert!(matches!(detokenize(&tokens, 3, 2), Err(LeapError::Framing(_))));
        let tokens = tokenize(&f);
        assert!(detokenize(&tokens, 2, 3).is_err());
        assert!(detokenize(&tokens[..5], 3, 2).is_err());
    }
}
