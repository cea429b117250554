//! Defects shipped with the crate, guarded by SHA-256 checksums.

use sha2::{Digest, Sha256};

use crate::archive::DefectFile;
use crate::error::{Error, Result};

pub struct Fixture {
    pub name: &'static str,
    pub json: &'static str,
    pub sha256: &'static str,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "a11_e6",
        json: include_str!("../fixtures/a11_e6.json"),
        sha256: "0212aa517e3b45fa72519815fe116ee6c7b83a49e426e3aca7dbed5377340445",
    },
    Fixture {
        name: "appendix1_a5_a2a2",
        json: include_str!("../fixtures/appendix1_a5_a2a2.json"),
        sha256: "d9c92a82ee4269932db79150136a12fcc40ced513e3cc6bf9636f6a58c89f4ea",
    },
    Fixture {
        name: "appendix2_e13_z11",
        json: include_str!("../fixtures/appendix2_e13_z11.json"),
        sha256: "031b9e240b5e57db2a1f8bfa5ab8188a88cbb4054b3b578d099cb8761a54599c",
    },
    Fixture {
        name: "appendix3_z13_q11",
        json: include_str!("../fixtures/appendix3_z13_q11.json"),
        sha256: "846b6e189677abdc4b593cedddc47475aab6b0b2d93148e05ad8fadcca53c214",
    },
    Fixture {
        name: "appendix4_s11_w13",
        json: include_str!("../fixtures/appendix4_s11_w13.json"),
        sha256: "78d0eeea1e21a5df0a9ea1163e718dd0754eb7555a63ad506756ea14434d619a",
    },
    Fixture {
        name: "appendix5_chain_loop",
        json: include_str!("../fixtures/appendix5_chain_loop.json"),
        sha256: "66f3a18a01750c6d7361847472cb3f55f1e3adf21d934acdebda5a8b30116897",
    },
];

impl Fixture {
    pub fn checksum_ok(&self) -> bool {
        hex::encode(Sha256::digest(self.json.as_bytes())) == self.sha256
    }

    pub fn load(&self) -> Result<DefectFile> {
        if !self.checksum_ok() {
            return Err(Error::Invalid(format!("fixture {} does not match its checksum", self.name)));
        }
        DefectFile::from_json(self.json)
    }
}

pub fn fixture(name: &str) -> Result<DefectFile> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::Invalid(format!("no fixture named {name}")))?
        .load()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_and_round_trip() {
        for f in FIXTURES {
            assert!(f.checksum_ok(), "{}", f.name);
            let d = f.load().unwrap();
            assert_eq!(d.to_json(), f.json, "{}", f.name);
        }
    }
}
