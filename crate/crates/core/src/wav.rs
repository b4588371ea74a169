//! RIFF/WAVE persistence: 16-bit PCM, little-endian, mono. No other
//! container layout is accepted.
//!
//! Reading maps integer sample `v` to `v / 32768`; writing quantizes with
//! round-half-away-from-zero and saturates at full scale, so a clip that came
//! from [`read_wav`] rewrites to a byte-identical data chunk.

use std::fs;
use std::path::Path;

use crate::audio::AudioClip;
use crate::error::{Error, Result};

const PCM_SCALE: f64 = 32768.0;

/// Reads a 16-bit PCM mono WAV file.
pub fn read_wav(path: &Path) -> Result<AudioClip> {
    let bytes = fs::read(path)?;
    decode_wav(&bytes)
}

/// Writes `clip` as a 16-bit PCM mono WAV file.
pub fn write_wav(clip: &AudioClip, path: &Path) -> Result<()> {
    fs::write(path, encode_wav(clip))?;
    Ok(())
}

/// Decodes a WAV byte buffer. See module docs for the accepted layout.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    if bytes.len() < 12 {
        return Err(Error::WavCorrupt("file shorter than RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::WavFormat("not a RIFF/WAVE file".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // tag, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .ok_or_else(|| Error::WavCorrupt("chunk size overflow".into()))?;
        if body_end > bytes.len() {
            return Err(Error::WavCorrupt(format!(
                "chunk {} declares {} bytes but only {} remain",
                String::from_utf8_lossy(id),
                size,
                bytes.len() - body_start
            )));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(Error::WavCorrupt("fmt chunk shorter than 16 bytes".into()));
                }
                let tag = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => data = Some(body),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry a pad byte.
        pos = body_end + (size & 1);
    }
    if pos != bytes.len() && pos + 8 > bytes.len() && pos < bytes.len() {
        return Err(Error::WavCorrupt("trailing bytes do not form a chunk".into()));
    }

    let (tag, channels, rate, bits) =
        fmt.ok_or_else(|| Error::WavCorrupt("missing fmt chunk".into()))?;
    if tag != 1 {
        return Err(Error::WavFormat(format!("format tag {tag}, only PCM (1) supported")));
    }
    if channels != 1 {
        return Err(Error::WavFormat(format!("{channels} channels, only mono supported")));
    }
    if bits != 16 {
        return Err(Error::WavFormat(format!("{bits}-bit samples, only 16-bit supported")));
    }
    if rate == 0 {
        return Err(Error::WavCorrupt("zero sample rate".into()));
    }
    let data = data.ok_or_else(|| Error::WavCorrupt("missing data chunk".into()))?;
    if data.len() % 2 != 0 {
        return Err(Error::WavCorrupt("data chunk has an odd byte count".into()));
    }

    let samples = data
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / PCM_SCALE)
        .collect();
    AudioClip::new(samples, rate)
}

/// Encodes `clip` as WAV bytes (44-byte canonical header plus PCM payload).
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let data_size = (clip.len() * 2) as u32;
    let mut buf = Vec::with_capacity(44 + data_size as usize);

    buf.extend_from_slice(b"RIFF");
    buf.extend_from_slice(&(36 + data_size).to_le_bytes());
    buf.extend_from_slice(b"WAVE");

    buf.extend_from_slice(b"fmt ");
    buf.extend_from_slice(&16u32.to_le_bytes());
    buf.extend_from_slice(&1u16.to_le_bytes()); // PCM
    buf.extend_from_slice(&1u16.to_le_bytes()); // mono
    buf.extend_from_slice(&clip.sample_rate().to_le_bytes());
    buf.extend_from_slice(&(clip.sample_rate() * 2).to_le_bytes());
    buf.extend_from_slice(&2u16.to_le_bytes()); // block align
    buf.extend_from_slice(&16u16.to_le_bytes());

    buf.extend_from_slice(b"data");
    buf.extend_from_slice(&data_size.to_le_bytes());
    for &s in clip.samples() {
        buf.extend_from_slice(&quantize(s).to_le_bytes());
    }
    buf
}

/// Round half away from zero, saturating at full scale.
fn quantize(sample: f64) -> i16 {
    (sample * PCM_SCALE).round().clamp(-32768.0, 32767.0) as i16
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantization_examples() {
        assert_eq!(quantize(0.5), 16384);
        assert_eq!(quantize(1.0), 32767); // saturates
        assert_eq!(quantize(-1.0), -32768);
        assert_eq!(quantize(32767.0 / 32768.0), 32767);
        assert_eq!(quantize(0.0), 0);
    }

    #[test]
    fn max_pcm_value_reads_as_just_under_one() {
        let mut bytes = encode_wav(&AudioClip::silence(1, 16_000).unwrap());
        let n = bytes.len();
        bytes[n - 2..].copy_from_slice(&32767i16.to_le_bytes());
        let clip = decode_wav(&bytes).unwrap();
        assert!((clip.samples()[0] - 32767.0 / 32768.0).abs() < 1e-12);
    }

    #[test]
    fn silent_file_round_trip() {
        let clip = AudioClip::silence(160, 16_000).unwrap();
        let back = decode_wav(&encode_wav(&clip)).unwrap();
        assert_eq!(back.len(), 160);
        assert_eq!(back.sample_rate(), 16_000);
        assert!(back.is_silent());
        assert!((back.duration_seconds() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn rejects_24_bit() {
        let mut bytes = encode_wav(&AudioClip::silence(4, 16_000).unwrap());
        bytes[34..36].copy_from_slice(&24u16.to_le_bytes());
        assert!(matches!(decode_wav(&bytes), Err(Error::WavFormat(_))));
    }

    #[test]
    fn rejects_stereo() {
        let mut bytes = encode_wav(&AudioClip::silence(4, 16_000).unwrap());
        bytes[22..24].copy_from_slice(&2u16.to_le_bytes());
        assert!(matches!(decode_wav(&bytes), Err(Error::WavFormat(_))));
    }

    #[test]
    fn rejects_float_format_tag() {
        let mut bytes = encode_wav(&AudioClip::silence(4, 16_000).unwrap());
        bytes[20..22].copy_from_slice(&3u16.to_le_bytes());
        assert!(matches!(decode_wav(&bytes), Err(Error::WavFormat(_))));
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let bytes = encode_wav(&AudioClip::silence(64, 16_000).unwrap());
        let truncated = &bytes[..bytes.len() - 10];
        assert!(matches!(decode_wav(truncated), Err(Error::WavCorrupt(_))));
    }

    #[test]
    fn garbage_is_not_wave() {
        assert!(matches!(decode_wav(b"RIFFxxxxJUNK"), Err(Error::WavFormat(_))));
        assert!(matches!(decode_wav(b"xx"), Err(Error::WavCorrupt(_))));
    }

    #[test]
    fn read_write_files(){
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let clip = AudioClip::new(vec![0.25, -0.5, 0.75], 16_000).unwrap();
        write_wav(&clip, &path).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert!(read_wav(&dir.path().join("missing.wav")).is_err());
    }

    #[test]
    fn skips_unknown_chunks() {
        let clip = AudioClip::new(vec![0.5], 16_000).unwrap();
        let canonical = encode_wav(&clip);
        // Splice a LIST chunk (odd-sized, so padded) between fmt and data.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&canonical[..36]);
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(b"abc\0");
        bytes.extend_from_slice(&canonical[36..]);
        let riff_size = (bytes.len() - 8) as u32;
        bytes[4..8].copy_from_slice(&riff_size.to_le_bytes());
        let back = decode_wav(&bytes).unwrap();
        assert_eq!(back.len(), 1);
    }

    proptest! {
        // Write->read moves no sample by more than one quantization step;
        // read->write reproduces the data chunk byte for byte.
        #[test]
        fn round_trip_error_bounded(samples in proptest::collection::vec(-1.0f64..=1.0, 1..256)) {
            let clip = AudioClip::new(samples, 16_000).unwrap();
            let bytes = encode_wav(&clip);
            let back = decode_wav(&bytes).unwrap();
            for (a, b) in clip.samples().iter().zip(back.samples()) {
                // Saturation at +1.0 still lands within one step of the original.
                prop_assert!((a - b).abs() <= 1.0 / PCM_SCALE + 1e-12);
            }
            let again = encode_wav(&back);
            prop_assert_eq!(bytes, again);
        }
    }
}
