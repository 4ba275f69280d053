use crate::inference::{Detection, Prediction};
use crate::video::{Frame, Pixel};

pub const BADGE_SIZE: u32 = 16;
pub const BORDER_THICKNESS: u32 = 2;

/// Class colors, indexed by class id modulo 8.
pub const PALETTE: [Pixel; 8] = [
    Pixel::new(230, 25, 75),
    Pixel::new(60, 180, 75),
    Pixel::new(0, 130, 200),
    Pixel::new(255, 225, 25),
    Pixel::new(145, 30, 180),
    Pixel::new(70, 240, 240),
    Pixel::new(245, 130, 48),
    Pixel::new(255, 255, 255),
];

fn palette(class: usize) -> Pixel {
    PALETTE[class % PALETTE.len()]
}

/// Integer pixel span `[start, end)` of a box edge, clipped to `0..limit`.
fn span(origin: f64, extent: f64, limit: u32) -> (u32, u32) {
    let start = origin.round().max(0.0);
    let end = (origin + extent).round().max(0.0);
    (start.min(limit as f64) as u32, end.min(limit as f64) as u32)
}

fn draw_box(frame: &mut Frame, d: &Detection) {
    let (w, h) = frame.dimensions();
    let (x0, x1) = span(d.x, d.w, w);
    let (y0, y1) = span(d.y, d.h, h);
    // border bands are measured from the unclipped box edges
    let bx0 = d.x.round() as i64;
    let by0 = d.y.round() as i64;
    let bx1 = (d.x + d.w).round() as i64;
    let by1 = (d.y + d.h).round() as i64;
    let t = BORDER_THICKNESS as i64;
    let color = palette(d.class_id as usize);
    for y in y0..y1 {
        for x in x0..x1 {
            let (xi, yi) = (x as i64, y as i64);
            if xi < bx0 + t || xi >= bx1 - t || yi < by0 + t || yi >= by1 - t {
                frame.set(x, y, color);
            }
        }
    }
}

/// Draws a prediction onto a copy of `frame`.
///
/// Class scores become a solid badge in the top-left corner colored by the
/// winning class. Detections become rectangle outlines colored by class id.
/// Every other pixel is left untouched.
pub fn overlay(frame: &Frame, prediction: &Prediction) -> Frame {
    let mut out = frame.clone();
    match prediction {
        Prediction::ClassScores { .. } => {
            if let Some(class) = prediction.argmax() {
                out.fill_rect(0, 0, BADGE_SIZE, BADGE_SIZE, palette(class));
            }
        }
        Prediction::Detections { items } => {
            for d in items {
                draw_box(&mut out, d);
            }
        }
    }
    out
}
