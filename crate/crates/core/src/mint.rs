//! Deterministic token encoding.
//!
//! A token's pair sequence is derived from a salted HMAC keystream: block `i`
//! is `HMAC(key = salt, msg = "<serial>:<i>")`, blocks are concatenated and
//! truncated to `keystream_len` bytes, and pair `j` is encoding
//! `keystream[j] mod 8`.

use std::fmt;
use std::str::FromStr;

use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::PairState;

pub const DEFAULT_KEYSTREAM_LEN: usize = 40;
pub const DEFAULT_PAIRS_PER_TOKEN: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HashId {
    #[serde(rename = "HMAC_MD5")]
    HmacMd5,
    #[serde(rename = "HMAC_SHA1")]
    HmacSha1,
    #[serde(rename = "HMAC_SHA256")]
    HmacSha256,
    #[serde(rename = "HMAC_SHA512")]
    HmacSha512,
}

impl HashId {
    pub const ALL: [HashId; 4] = [
        HashId::HmacMd5,
        HashId::HmacSha1,
        HashId::HmacSha256,
        HashId::HmacSha512,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HashId::HmacMd5 => "HMAC_MD5",
            HashId::HmacSha1 => "HMAC_SHA1",
            HashId::HmacSha256 => "HMAC_SHA256",
            HashId::HmacSha512 => "HMAC_SHA512",
        }
    }

    pub fn digest_len(self) -> usize {
        match self {
            HashId::HmacMd5 => 16,
            HashId::HmacSha1 => 20,
            HashId::HmacSha256 => 32,
            HashId::HmacSha512 => 64,
        }
    }

    fn block(self, key: &[u8], serial: &str, counter: usize) -> Vec<u8> {
        fn run<M: Mac + hmac::digest::KeyInit>(
            key: &[u8],
            serial: &str,
            counter: usize,
        ) -> Vec<u8> {
            let mut mac = <M as Mac>::new_from_slice(key).expect("HMAC takes any key length");
            mac.update(serial.as_bytes());
            mac.update(b":");
            mac.update(counter.to_string().as_bytes());
            mac.finalize().into_bytes().to_vec()
        }
        match self {
            HashId::HmacMd5 => run::<Hmac<md5::Md5>>(key, serial, counter),
            HashId::HmacSha1 => run::<Hmac<sha1::Sha1>>(key, serial, counter),
            HashId::HmacSha256 => run::<Hmac<sha2::Sha256>>(key, serial, counter),
            HashId::HmacSha512 => run::<Hmac<sha2::Sha512>>(key, serial, counter),
        }
    }
}

impl fmt::Display for HashId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HashId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_uppercase().replace('-', "_");
        let norm = norm.strip_prefix("HMAC_").unwrap_or(&norm);
        match norm {
            "MD5" => Ok(HashId::HmacMd5),
            "SHA1" => Ok(HashId::HmacSha1),
            "SHA256" => Ok(HashId::HmacSha256),
            "SHA512" => Ok(HashId::HmacSha512),
            _ => Err(Error::Parse(format!("unknown hash function {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub hash: HashId,
    pub salt: String,
    pub keystream_len: usize,
    pub pairs_per_token: usize,
}

impl EncodingSpec {
    pub fn new(hash: HashId, salt: impl Into<String>) -> Result<EncodingSpec> {
        EncodingSpec::with_lengths(hash, salt, DEFAULT_KEYSTREAM_LEN, DEFAULT_PAIRS_PER_TOKEN)
    }

    pub fn with_lengths(
        hash: HashId,
        salt: impl Into<String>,
        keystream_len: usize,
        pairs_per_token: usize,
    ) -> Result<EncodingSpec> {
        let spec = EncodingSpec {
            hash,
            salt: salt.into(),
            keystream_len,
            pairs_per_token,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.salt.is_empty() || !self.salt.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidSpec(format!(
                "salt must be a non-empty decimal string, got {:?}",
                self.salt
            )));
        }
        if self.pairs_per_token == 0 || self.keystream_len < self.pairs_per_token {
            return Err(Error::InvalidSpec(format!(
                "keystream_len {} must cover pairs_per_token {}",
                self.keystream_len, self.pairs_per_token
            )));
        }
        Ok(())
    }

    /// Same lengths, different secret.
    pub fn with_secret(&self, hash: HashId, salt: impl Into<String>) -> EncodingSpec {
        EncodingSpec {
            hash,
            salt: salt.into(),
            ..self.clone()
        }
    }
}

pub fn keystream(spec: &EncodingSpec, serial: &str) -> Vec<u8> {
    let key = spec.salt.as_bytes();
    let mut out = Vec::with_capacity(spec.keystream_len + spec.hash.digest_len());
    let mut counter = 0;
    while out.len() < spec.keystream_len {
        out.extend(spec.hash.block(key, serial, counter));
        counter += 1;
    }
    out.truncate(spec.keystream_len);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub serial: String,
    pub pairs: Vec<PairState>,
}

impl Token {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_record(&self, hash: HashId) -> TokenRecord {
        TokenRecord {
            serial: self.serial.clone(),
            hash,
            pairs: self.pairs.iter().map(|p| p.index() as u8).collect(),
        }
    }
}

/// On-disk token layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub serial: String,
    pub hash: HashId,
    pub pairs: Vec<u8>,
}

impl TokenRecord {
    pub fn into_token(self) -> Result<Token> {
        if self.serial.is_empty() {
            return Err(Error::Parse("token serial is empty".into()));
        }
        let pairs = self
            .pairs
            .iter()
            .map(|&k| PairState::from_index(k as usize))
            .collect::<Result<_>>()?;
        Ok(Token {
            serial: self.serial,
            pairs,
        })
    }
}

/// Maps keystream bytes to pairs. Exposed so tests can inject a keystream.
pub fn token_from_keystream(spec: &EncodingSpec, serial: &str, stream: &[u8]) -> Token {
    Token {
        serial: serial.to_owned(),
        pairs: stream[..spec.pairs_per_token]
            .iter()
            .map(|b| PairState::ALL[(b % 8) as usize])
            .collect(),
    }
}

pub fn mint_token(spec: &EncodingSpec, serial: &str) -> Token {
    token_from_keystream(spec, serial, &keystream(spec, serial))
}

/// Pair `j` of the token for `serial`, hashing only the block that holds it.
pub fn predict_pair(spec: &EncodingSpec, serial: &str, j: usize) -> Result<PairState> {
    if j >= spec.pairs_per_token {
        return Err(Error::PairOutOfRange {
            index: j,
            len: spec.pairs_per_token,
        });
    }
    let width = spec.hash.digest_len();
    let block = spec.hash.block(spec.salt.as_bytes(), serial, j / width);
    Ok(PairState::ALL[(block[j % width] % 8) as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(hash: HashId, salt: &str) -> EncodingSpec {
        EncodingSpec::new(hash, salt).unwrap()
    }

    fn hex(bytes: &[u8]) -> String {
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    // Reference values computed with Python's hmac module before this code
    // existed.
    #[test]
    fn reference_keystreams() {
        assert_eq!(
            hex(&keystream(&spec(HashId::HmacSha256, "123"), "42")),
            "50a2047b62c0f78d29aa899d8128ff1b4db71201e3424997c2710b2fe7723403c2fcbd1d65dc0239"
        );
        assert_eq!(
            hex(&keystream(&spec(HashId::HmacMd5, "7"), "000")),
            "5b08491b973f6e00abfaa778dd56b637def9760fba3a7a5c82b2510590d756352744432dc6ed273f"
        );
        assert_eq!(
            hex(&keystream(&spec(HashId::HmacSha1, "7"), "000")),
            "7a41820608224e9b9e221b1bcaa36b3a4c690dd6d163f8cdb421e028028195fc239976ce61fa9225"
        );
        assert_eq!(
            hex(&keystream(&spec(HashId::HmacSha512, "7"), "000")),
            "c52b235dcaa5955520868954c0cccc2cc8136ae6caab9673fa0802b9eeb42bfd3db79f1a5716b19a"
        );
    }

    #[test]
    fn reference_token() {
        let t = mint_token(&spec(HashId::HmacSha256, "123"), "42");
        let idx: Vec<usize> = t.pairs.iter().map(|p| p.index()).collect();
        assert_eq!(
            idx,
            [
                0, 2, 4, 3, 2, 0, 7, 5, 1, 2, 1, 5, 1, 0, 7, 3, 5, 7, 2, 1, 3, 2, 1, 7, 2, 1, 3, 7,
                7, 2, 4, 3, 2, 4, 5, 5, 5, 4, 2, 1
            ]
        );
    }

    #[test]
    fn zero_keystream_gives_first_encoding() {
        let s = spec(HashId::HmacSha1, "1");
        let t = token_from_keystream(&s, "9", &[0u8; 40]);
        assert_eq!(t.len(), 40);
        assert!(t.pairs.iter().all(|p| p.index() == 0));
    }

    #[test]
    fn invalid_specs() {
        assert!(EncodingSpec::new(HashId::HmacMd5, "").is_err());
        assert!(EncodingSpec::new(HashId::HmacMd5, "12a").is_err());
        assert!(EncodingSpec::with_lengths(HashId::HmacMd5, "1", 10, 20).is_err());
    }

    #[test]
    fn predict_out_of_range() {
        let s = spec(HashId::HmacSha512, "5");
        assert!(matches!(
            predict_pair(&s, "1", 40),
            Err(Error::PairOutOfRange { index: 40, len: 40 })
        ));
    }

    #[test]
    fn hash_names_roundtrip() {
        for h in HashId::ALL {
            assert_eq!(h.name().parse::<HashId>().unwrap(), h);
            let json = serde_json::to_string(&h).unwrap();
            assert_eq!(json, format!("\"{}\"", h.name()));
        }
        assert_eq!("sha256".parse::<HashId>().unwrap(), HashId::HmacSha256);
        assert_eq!("hmac-md5".parse::<HashId>().unwrap(), HashId::HmacMd5);
    }

    #[test]
    fn distinct_salts_give_distinct_keystreams() {
        let a = spec(HashId::HmacSha256, "123");
        let b = spec(HashId::HmacSha256, "124");
        let same = (0..1000)
            .filter(|i| keystream(&a, &i.to_string()) == keystream(&b, &i.to_string()))
            .count();
        assert!(same <= 1);
    }

    #[test]
    fn predicted_indices_look_uniform() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let s = spec(HashId::HmacMd5, "314");
        let mut counts = [0f64; 8];
        let n = 10_000;
        for i in 0..n {
            counts[predict_pair(&s, &format!("{i:06}"), i % 40)
                .unwrap()
                .index()] += 1.0;
        }
        let expected = n as f64 / 8.0;
        let stat: f64 = counts
            .iter()
            .map(|c| (c - expected).powi(2) / expected)
            .sum();
        let p = 1.0 - ChiSquared::new(7.0).unwrap().cdf(stat);
        assert!(p > 0.001, "chi2 {stat} p {p}");
    }

    #[test]
    fn token_record_roundtrip() {
        let s = spec(HashId::HmacSha1, "77");
        let t = mint_token(&s, "000017");
        let json = serde_json::to_string(&t.to_record(s.hash)).unwrap();
        assert!(json.starts_with("{\"serial\":\"000017\",\"hash\":\"HMAC_SHA1\",\"pairs\":["));
        let back: TokenRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_token().unwrap(), t);
    }

    proptest! {
        #[test]
        fn predict_agrees_with_mint(
            hash in prop::sample::select(HashId::ALL.to_vec()),
            salt in "[0-9]{1,6}",
            serial in "[0-9]{1,8}",
        ) {
            let s = spec(hash, &salt);
            let t = mint_token(&s, &serial);
            prop_assert_eq!(t.len(), s.pairs_per_token);
            prop_assert_eq!(keystream(&s, &serial).len(), s.keystream_len);
            for j in 0..s.pairs_per_token {
                prop_assert_eq!(predict_pair(&s, &serial, j).unwrap(), t.pairs[j]);
            }
        }
    }
}
