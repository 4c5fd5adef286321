//! IDX image-file ingestion (the big-endian format used by the common
//! handwritten-digit benchmarks).

use std::io::Read;

use manifold_ann::{Error, PointCloud, Result};

const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;

/// Read an IDX ubyte image file into a point cloud, one flattened image per
/// row with intensities cast to reals.
pub fn read_idx_images<R: Read>(mut reader: R) -> Result<PointCloud> {
    let mut header = [0u8; 16];
    reader
        .read_exact(&mut header)
        .map_err(|_| Error::Format("IDX header truncated".into()))?;
    let magic = u32::from_be_bytes(header[0..4].try_into().unwrap());
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "bad IDX magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x} (ubyte images)"
        )));
    }
    let count = u32::from_be_bytes(header[4..8].try_into().unwrap()) as usize;
    let rows = u32::from_be_bytes(header[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_be_bytes(header[12..16].try_into().unwrap()) as usize;
    let dim = rows * cols;
    if count == 0 || dim == 0 {
        return Err(Error::Format("IDX file declares an empty image set".into()));
    }

    let mut pixels = Vec::with_capacity(count * dim);
    let mut buf = vec![0u8; dim];
    for i in 0..count {
        reader.read_exact(&mut buf).map_err(|_| {
            Error::Format(format!("IDX payload truncated at image {i} of {count}"))
        })?;
        pixels.extend(buf.iter().map(|&b| b as f64));
    }
    PointCloud::new(pixels, dim)
}

/// First `limit` images of an IDX file (index order), or all of them.
pub fn read_idx_images_limited<R: Read>(reader: R, limit: Option<usize>) -> Result<PointCloud> {
    let cloud = read_idx_images(reader)?;
    use manifold_ann::Coordinates;
    match limit {
        Some(limit) if limit < cloud.len() => {
            let dim = cloud.dim();
            PointCloud::new(cloud.as_slice()[..limit * dim].to_vec(), dim)
        }
        _ => Ok(cloud),
    }
}

/// Sniff the leading magic of a file to decide whether it is IDX.
pub fn looks_like_idx(path: &std::path::Path) -> bool {
    let Ok(mut file) = std::fs::File::open(path) else {
        return false;
    };
    let mut magic = [0u8; 4];
    if file.read_exact(&mut magic).is_err() {
        return false;
    }
    u32::from_be_bytes(magic) == IDX_IMAGE_MAGIC
}

#[cfg(test)]
mod tests {
    use super::*;
    use manifold_ann::Coordinates;

    fn idx_bytes(count: u32, rows: u32, cols: u32, payload: &[u8]) -> Vec<u8> {
        let mut bytes = Vec::new();
        bytes.extend(IDX_IMAGE_MAGIC.to_be_bytes());
        bytes.extend(count.to_be_bytes());
        bytes.extend(rows.to_be_bytes());
        bytes.extend(cols.to_be_bytes());
        bytes.extend(payload);
        bytes
    }

    #[test]
    fn minimal_valid_file() {
        let payload = vec![7u8; 784];
        let bytes = idx_bytes(1, 28, 28, &payload);
        let cloud = read_idx_images(bytes.as_slice()).unwrap();
        assert_eq!(cloud.len(), 1);
        assert_eq!(cloud.dim(), 784);
        assert_eq!(cloud.row(0)[0], 7.0);
    }

    #[test]
    fn label_magic_rejected() {
        let mut bytes = idx_bytes(1, 28, 28, &vec![0u8; 784]);
        bytes[3] = 0x01; // label-file magic 0x00000801
        let err = read_idx_images(bytes.as_slice()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn truncated_payload_rejected() {
        let bytes = idx_bytes(2, 28, 28, &vec![0u8; 784]); // one image short
        let err = read_idx_images(bytes.as_slice()).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }

    #[test]
    fn limit_takes_a_prefix() {
        let mut payload = vec![1u8; 4];
        payload.extend(vec![2u8; 4]);
        payload.extend(vec![3u8; 4]);
        let bytes = idx_bytes(3, 2, 2, &payload);
        let cloud = read_idx_images_limited(bytes.as_slice(), Some(2)).unwrap();
        assert_eq!(cloud.len(), 2);
        assert_eq!(cloud.row(1), &[2.0, 2.0, 2.0, 2.0]);
    }
}
