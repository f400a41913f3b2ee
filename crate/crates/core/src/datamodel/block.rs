use super::schema::{FeatureSchema, FeatureSpec, ImageLayout};
use crate::error::{Error, Result};

/// Cuts a square image into `block_side`-sized blocks.
///
/// Blocks are returned in row-major block order, each holding its pixels in
/// row-major order.
pub fn block_featurize(image: &[Vec<f64>], block_side: usize) -> Result<Vec<Vec<f64>>> {
    let side = image.len();
    if image.iter().any(|row| row.len() != side) {
        return Err(Error::InvalidArgument("image must be square".into()));
    }
    let flat: Vec<f64> = image.iter().flatten().copied().collect();
    let blocks = block_featurize_flat(&flat, side, block_side)?;
    let pixels = block_side * block_side;
    Ok(blocks.chunks(pixels).map(|c| c.to_vec()).collect())
}

/// [`block_featurize`] over a flat row-major image, returning the blocks
/// concatenated.
pub fn block_featurize_flat(pixels: &[f64], side: usize, block_side: usize) -> Result<Vec<f64>> {
    if block_side == 0 || !side.is_multiple_of(block_side) {
        return Err(Error::InvalidArgument(format!("image side {side} is not divisible by block side {block_side}")));
    }
    if pixels.len() != side * side {
        return Err(Error::Dimension { expected: side * side, actual: pixels.len() });
    }
    let per_side = side / block_side;
    let mut out = Vec::with_capacity(pixels.len());
    for by in 0..per_side {
        for bx in 0..per_side {
            for y in 0..block_side {
                let row = (by * block_side + y) * side;
                let start = row + bx * block_side;
                out.extend_from_slice(&pixels[start..start + block_side]);
            }
        }
    }
    Ok(out)
}

/// Inverse of [`block_featurize_flat`]: blocks back to a row-major image.
pub fn unblock_into(blocks: &[f64], layout: ImageLayout, out: &mut [f64]) {
    let side = layout.side;
    let bs = layout.block_side;
    let per_side = layout.blocks_per_side();
    let mut k = 0;
    for by in 0..per_side {
        for bx in 0..per_side {
            for y in 0..bs {
                let start = (by * bs + y) * side + bx * bs;
                out[start..start + bs].copy_from_slice(&blocks[k..k + bs]);
                k += bs;
            }
        }
    }
}

/// Schema with one block feature per `block_side`² patch, each costing one
/// unit per pixel.
pub fn image_block_schema(side: usize, block_side: usize, class_count: usize) -> Result<FeatureSchema> {
    if block_side == 0 || !side.is_multiple_of(block_side) {
        return Err(Error::InvalidArgument(format!("image side {side} is not divisible by block side {block_side}")));
    }
    let per_side = side / block_side;
    let features =
        (0..per_side * per_side).map(|i| FeatureSpec::block(format!("block_{i}"), block_side * block_side)).collect();
    FeatureSchema::new(features, class_count)?.with_image(ImageLayout { side, block_side })
}
