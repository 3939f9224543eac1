//! Line-based search checkpoint, version 1:
//!
//! ```text
//! crcsel-checkpoint 1
//! config <fnv1a-64 of identity, 16 hex digits> <identity>
//! blocks <total> <bitmap: hex, bit b of the byte stream = block b done>
//! entry <M> <poly_hex> <order> <score>      (zero or more)
//! end <count of entry lines>
//! ```
//!
//! Files are written to a sibling temporary path and renamed into place.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gf2poly::Gf2Poly;
use crate::search::LeaderEntry;

const MAGIC: &str = "crcsel-checkpoint 1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub identity: String,
    pub completed: Vec<bool>,
    pub entries: Vec<(usize, LeaderEntry)>,
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut bitmap = vec![0u8; self.completed.len().div_ceil(8)];
        for (b, _) in self.completed.iter().enumerate().filter(|(_, &c)| c) {
            bitmap[b / 8] |= 1 << (b % 8);
        }
        let bitmap: String = bitmap.iter().map(|byte| format!("{byte:02x}")).collect();
        let mut out = format!(
            "{MAGIC}\nconfig {:016x} {}\nblocks {} {}\n",
            fnv1a(self.identity.as_bytes()),
            self.identity,
            self.completed.len(),
            if bitmap.is_empty() { "-" } else { &bitmap }
        );
        for (m, e) in &self.entries {
            out.push_str(&format!("entry {m} {} {} {}\n", e.poly, e.order, e.score));
        }
        out.push_str(&format!("end {}\n", self.entries.len()));
        out
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err("missing or unsupported header".into());
        }
        let config = lines
            .next()
            .and_then(|l| l.strip_prefix("config "))
            .ok_or("missing config line")?;
        let (hash, identity) = config.split_once(' ').ok_or("malformed config line")?;
        if u64::from_str_radix(hash, 16).ok() != Some(fnv1a(identity.as_bytes())) {
            return Err("config hash does not match config text".into());
        }

        let blocks = lines
            .next()
            .and_then(|l| l.strip_prefix("blocks "))
            .ok_or("missing blocks line")?;
        let (total, bitmap) = blocks.split_once(' ').ok_or("malformed blocks line")?;
        let total: usize = total.parse().map_err(|_| "bad block count")?;
        let bytes: Vec<u8> = if bitmap == "-" {
            Vec::new()
        } else {
            if bitmap.len() % 2 != 0 {
                return Err("odd-length bitmap".into());
            }
            (0..bitmap.len())
                .step_by(2)
                .map(|i| u8::from_str_radix(&bitmap[i..i + 2], 16))
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| "bitmap is not hex")?
        };
        if bytes.len() != total.div_ceil(8) {
            return Err("bitmap length does not match block count".into());
        }
        let completed: Vec<bool> = (0..total).map(|b| bytes[b / 8] >> (b % 8) & 1 == 1).collect();
        if bytes.iter().enumerate().any(|(i, &byte)| {
            let valid = total.saturating_sub(i * 8).min(8);
            valid < 8 && byte >> valid != 0
        }) {
            return Err("bitmap has bits beyond the block count".into());
        }

        let mut entries = Vec::new();
        for line in lines.by_ref() {
            if let Some(count) = line.strip_prefix("end ") {
                if count.parse::<usize>().ok() != Some(entries.len()) {
                    return Err("entry count mismatch (truncated file?)".into());
                }
                return Ok(Checkpoint {
                    identity: identity.to_string(),
                    completed,
                    entries,
                });
            }
            let fields: Vec<&str> = line
                .strip_prefix("entry ")
                .ok_or_else(|| format!("unexpected line {line:?}"))?
                .split(' ')
                .collect();
            let [m, poly, order, score] = fields[..] else {
                return Err(format!("malformed entry {line:?}"));
            };
            let entry = LeaderEntry {
                poly: Gf2Poly::parse_hex(poly).map_err(|e| e.to_string())?,
                order: order.parse().map_err(|_| "bad order")?,
                score: score.parse().map_err(|_| "bad score")?,
            };
            entries.push((m.parse().map_err(|_| "bad target")?, entry));
        }
        Err("missing end line (truncated file?)".into())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|msg| Error::Checkpoint {
            path: path.to_path_buf(),
            msg: format!("corrupt checkpoint: {msg}"),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = std::path::PathBuf::from(tmp);
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        fs::write(&tmp, self.to_text()).map_err(io)?;
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn check_matches(&self, identity: &str, total_blocks: usize, path: &Path) -> Result<()> {
        if self.identity != identity {
            return Err(Error::Checkpoint {
                path: path.to_path_buf(),
                msg: format!(
                    "checkpoint was written for a different search ({}) than requested ({identity})",
                    self.identity
                ),
            });
        }
        if self.completed.len() != total_blocks {
            return Err(Error::Checkpoint {
                path: path.to_path_buf(),
                msg: format!(
                    "checkpoint has {} blocks, search has {total_blocks}",
                    self.completed.len()
                ),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            identity: "p=11 targets=512 top_k=8 block_size=1024 source=all".into(),
            completed: vec![true, false, true, true, false, false, false, false, true, false],
            entries: vec![(
                512,
                LeaderEntry {
                    poly: Gf2Poly::parse_hex("93f").unwrap(),
                    order: 762,
                    score: 2044,
                },
            )],
        }
    }

    #[test]
    fn text_round_trip() {
        let ckpt = sample();
        let text = ckpt.to_text();
        let expected = format!(
            "crcsel-checkpoint 1\n\
             config {:016x} p=11 targets=512 top_k=8 block_size=1024 source=all\n\
             blocks 10 0d01\n\
             entry 512 93f 762 2044\n\
             end 1\n",
            fnv1a(ckpt.identity.as_bytes())
        );
        assert_eq!(text, expected);
        assert_eq!(Checkpoint::parse(&text).unwrap(), ckpt);
    }

    #[test]
    fn rejects_corruption() {
        let text = sample().to_text();
        let truncated = &text[..text.len() - 6];
        assert!(Checkpoint::parse(truncated).is_err());
        assert!(Checkpoint::parse(&text.replace("p=11", "p=12")).is_err());
        assert!(Checkpoint::parse(&text.replace("0d01", "0d0")).is_err());
        assert!(Checkpoint::parse(&text.replace("0d01", "0dff")).is_err());
        assert!(Checkpoint::parse(&text.replace("end 1", "end 2")).is_err());
        assert!(Checkpoint::parse(&text.replace("93f", "93g")).is_err());
        assert!(Checkpoint::parse("").is_err());
        assert!(Checkpoint::parse(&text.replace("checkpoint 1", "checkpoint 2")).is_err());
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
    }
}
