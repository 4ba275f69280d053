use crate::error::{LeapError, Result};
use crate::video::MAX_DIMENSION;

const FIELD_MASK: u32 = 0xFFF;
const COLS_SHIFT: u32 = 12;
const RESET_BIT: u32 = 1 << 24;

/// 32-bit GPIO control word for the enhancement cores.
///
/// Layout: bits `[11:0]` rows, `[23:12]` cols, bit 24 reset, `[31:25]` unused.
#[repr(transparent)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GpioWord(pub u32);

impl GpioWord {
    pub fn rows(self) -> u32 {
        self.0 & FIELD_MASK
    }

    pub fn cols(self) -> u32 {
        (self.0 >> COLS_SHIFT) & FIELD_MASK
    }

    pub fn reset(self) -> bool {
        self.0 & RESET_BIT != 0
    }
}

pub fn pack_gpio(rows: u32, cols: u32, reset: bool) -> Result<GpioWord> {
    if rows > MAX_DIMENSION || cols > MAX_DIMENSION {
        return Err(LeapError::Range(format!(
            "rows {rows} / cols {cols} exceed the 12-bit field"
        )));
    }
    Ok(GpioWord(rows | (cols << COLS_SHIFT) | if reset { RESET_BIT } else { 0 }))
}

/// Splits a word into `(rows, cols, reset)`, ignoring the unused high bits.
pub fn unpack_gpio(word: GpioWord) -> (u32, u32, bool) {
    (word.rows(), word.cols(), word.reset())
}
