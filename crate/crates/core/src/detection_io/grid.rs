//! Detector head decoding.
//!
//! The head emits, for each of the `N x N` grid cells and each of its three
//! anchors, a payload `[cx, cy, w, h, objectness, p_truck, p_vehicle,
//! p_pedestrian]`. Cells are laid out row-major, anchors contiguous within a
//! cell. Box fields are absolute pixels; normalisation is the caller's job.

use std::cmp::Ordering;

use super::{DecodeError, Detection, DetectionError, NUM_CLASSES};

/// File magic of a raw grid payload file.
pub const GRID_MAGIC: &[u8; 8] = b"RWGRID01";
const HEADER_LEN: usize = 16;

/// Shape of one detector output frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    grid_size: u16,
    image_width: u16,
    image_height: u16,
}

impl GridSpec {
    pub const ANCHORS_PER_CELL: usize = 3;
    pub const NUM_CLASSES: usize = NUM_CLASSES;
    /// Box (4) + objectness (1) + class scores.
    pub const ANCHOR_LEN: usize = 4 + 1 + NUM_CLASSES;

    pub fn new(grid_size: u16, image_width: u16, image_height: u16) -> Result<Self, DecodeError> {
        if grid_size == 0 {
            return Err(DecodeError::Spec("grid size must be positive".into()));
        }
        if image_width == 0 || image_height == 0 {
            return Err(DecodeError::Spec("image size must be positive".into()));
        }
        Ok(Self {
            grid_size,
            image_width,
            image_height,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size as usize
    }

    pub fn image_width(&self) -> f64 {
        f64::from(self.image_width)
    }

    pub fn image_height(&self) -> f64 {
        f64::from(self.image_height)
    }

    pub fn num_anchors(&self) -> usize {
        self.grid_size() * self.grid_size() * Self::ANCHORS_PER_CELL
    }

    /// Floats per frame: `N * N * 3 * (4 + 1 + 3)`.
    pub fn payload_len(&self) -> usize {
        self.num_anchors() * Self::ANCHOR_LEN
    }
}

/// Decodes one frame of raw detector output.
///
/// Keeps every anchor whose `objectness * max_j(class_confidence_j)` is
/// strictly above `score_threshold`, sorted by descending score with ties in
/// (cell, anchor) scan order. Centres outside the image are clamped to its
/// border. No suppression of overlapping boxes is done here.
pub fn decode_grid(
    raw: &[f32],
    spec: &GridSpec,
    score_threshold: f64,
    frame_index: u64,
) -> Result<Vec<Detection>, DecodeError> {
    if raw.len() != spec.payload_len() {
        return Err(DecodeError::PayloadLength {
            expected: spec.payload_len(),
            actual: raw.len(),
        });
    }
    if !(0.0..=1.0).contains(&score_threshold) {
        return Err(DecodeError::Threshold(score_threshold));
    }

    let mut out = Vec::new();
    for (n, anchor) in raw.chunks_exact(GridSpec::ANCHOR_LEN).enumerate() {
        let cell = n / GridSpec::ANCHORS_PER_CELL;
        let slot = n % GridSpec::ANCHORS_PER_CELL;
        let at = |source| DecodeError::Anchor {
            cell,
            anchor: slot,
            source,
        };

        let objectness = f64::from(anchor[4]);
        let mut conf = [0.0; NUM_CLASSES];
        for (c, p) in conf.iter_mut().zip(&anchor[5..]) {
            *c = f64::from(*p);
        }
        for (what, p) in std::iter::once(("objectness", objectness))
            .chain(conf.iter().map(|p| ("class confidence", *p)))
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(at(DetectionError::Probability { what, value: p }));
            }
        }

        // Product of two f32 values is exact in f64.
        let score = objectness * conf.iter().copied().fold(0.0, f64::max);
        if score <= score_threshold {
            continue;
        }

        let cx = f64::from(anchor[0]);
        let cy = f64::from(anchor[1]);
        if !(cx.is_finite() && cy.is_finite()) {
            return Err(at(DetectionError::NonFinite("center")));
        }
        let center = [
            cx.clamp(0.0, spec.image_width()),
            cy.clamp(0.0, spec.image_height()),
        ];
        let det = Detection::new(
            frame_index,
            center,
            f64::from(anchor[2]),
            f64::from(anchor[3]),
            objectness,
            conf,
        )
        .map_err(at)?;
        out.push(det);
    }

    // Stable sort keeps scan order among equal scores.
    out.sort_by(|a, b| {
        b.combined_score
            .partial_cmp(&a.combined_score)
            .unwrap_or(Ordering::Equal)
    });
    Ok(out)
}

/// A raw grid payload file: header plus zero or more frames.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub spec: GridSpec,
    pub frames: Vec<Vec<f32>>,
}

/// Parses `RWGRID01` bytes: a 16-byte little-endian header
/// `{magic[8], N: u16, anchors: u8, classes: u8, width: u16, height: u16}`
/// followed by whole frames of little-endian `f32`.
pub fn read_grid_file(bytes: &[u8]) -> Result<GridFile, DecodeError> {
    if bytes.len() < HEADER_LEN {
        return Err(DecodeError::Header(format!(
            "need {HEADER_LEN} header bytes, got {}",
            bytes.len()
        )));
    }
    if &bytes[..8] != GRID_MAGIC {
        return Err(DecodeError::Header("bad magic".into()));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let grid_size = u16_at(8);
    let anchors = bytes[10];
    let classes = bytes[11];
    if usize::from(anchors) != GridSpec::ANCHORS_PER_CELL {
        return Err(DecodeError::Header(format!(
            "unsupported anchor count {anchors}"
        )));
    }
    if usize::from(classes) != GridSpec::NUM_CLASSES {
        return Err(DecodeError::Header(format!(
            "unsupported class count {classes}"
        )));
    }
    let spec = GridSpec::new(grid_size, u16_at(12), u16_at(14))?;

    let body = &bytes[HEADER_LEN..];
    let frame_bytes = spec.payload_len() * 4;
    if !body.len().is_multiple_of(frame_bytes) {
        return Err(DecodeError::Header(format!(
            "body of {} bytes is not a whole number of {frame_bytes}-byte frames",
            body.len()
        )));
    }
    let frames = body
        .chunks_exact(frame_bytes)
        .map(|chunk| {
            chunk
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect()
        })
        .collect();
    Ok(GridFile { spec, frames })
}

pub fn write_grid_file(file: &GridFile) -> Result<Vec<u8>, DecodeError> {
    let spec = &file.spec;
    let mut out = Vec::with_capacity(HEADER_LEN + file.frames.len() * spec.payload_len() * 4);
    out.extend_from_slice(GRID_MAGIC);
    out.extend_from_slice(&spec.grid_size.to_le_bytes());
    out.push(GridSpec::ANCHORS_PER_CELL as u8);
    out.push(GridSpec::NUM_CLASSES as u8);
    out.extend_from_slice(&spec.image_width.to_le_bytes());
    out.extend_from_slice(&spec.image_height.to_le_bytes());
    for frame in &file.frames {
        if frame.len() != spec.payload_len() {
            return Err(DecodeError::PayloadLength {
                expected: spec.payload_len(),
                actual: frame.len(),
            });
        }
        for v in frame {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}
