//! Built-in benchmark instances: short peptide sequences with the lattices
//! each one is studied on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{qubit_count, LatticeKind};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Instance {
    pub pdb_id: &'static str,
    pub sequence: &'static str,
    pub lattices: &'static [LatticeKind],
}

use LatticeKind::{Bcc, Fcc, Tetra};

const ALL: &[LatticeKind] = &[Tetra, Bcc, Fcc];
const T_B: &[LatticeKind] = &[Tetra, Bcc];
const T_F: &[LatticeKind] = &[Tetra, Fcc];
const B_F: &[LatticeKind] = &[Bcc, Fcc];
const T: &[LatticeKind] = &[Tetra];
const B: &[LatticeKind] = &[Bcc];
const F: &[LatticeKind] = &[Fcc];

pub const INSTANCES: &[Instance] = &[
    Instance { pdb_id: "4QXX", sequence: "GNLVS", lattices: F },
    Instance { pdb_id: "2OL9", sequence: "SNQNNF", lattices: F },
    Instance { pdb_id: "ABCP", sequence: "APRLRFY", lattices: B },
    Instance { pdb_id: "2M6C", sequence: "GCVLYPWC", lattices: B_F },
    Instance { pdb_id: "1N9U", sequence: "DRVYIHPFHL", lattices: B },
    Instance { pdb_id: "5AWL", sequence: "YYDPETGTWY", lattices: ALL },
    Instance { pdb_id: "2K2R", sequence: "DLDALLADLE", lattices: T_F },
    Instance { pdb_id: "2MZX", sequence: "QYQFWKNFQT", lattices: T_F },
    Instance { pdb_id: "1IXU", sequence: "FATMRYPSDSDE", lattices: T_F },
    Instance { pdb_id: "2N5R", sequence: "VRRFDLLKRILK", lattices: ALL },
    Instance { pdb_id: "2L24", sequence: "IFGAIAGFIKNIW", lattices: ALL },
    Instance { pdb_id: "6Q08", sequence: "INWLKLGKKIIASL", lattices: T },
    Instance { pdb_id: "1K43", sequence: "RGKWTYNGITYEGR", lattices: ALL },
    Instance { pdb_id: "8T61", sequence: "RHYYKFNSTGRHYHYY", lattices: T_B },
    Instance { pdb_id: "8T63", sequence: "WHMWNTVPNAKQVIAA", lattices: T },
    Instance { pdb_id: "2NDC", sequence: "GGLRSLGRKILRAWKKYG", lattices: T },
    Instance { pdb_id: "2NDE", sequence: "IGLRGLGRKIALIHKKYG", lattices: T },
    Instance { pdb_id: "2JOF", sequence: "DAYAQWLKDGGPSSGRPPPS", lattices: T },
    Instance { pdb_id: "8B1X", sequence: "KKPGASLAALQALQALQAAQAAKKY", lattices: T },
    Instance { pdb_id: "6A8Y", sequence: "YYHFWHRGVTKRSLSPHRPRHSRLQR", lattices: T },
];

pub fn find(pdb_id: &str) -> Result<&'static Instance> {
    INSTANCES
        .iter()
        .find(|i| i.pdb_id.eq_ignore_ascii_case(pdb_id))
        .ok_or_else(|| Error::Parameter(format!("unknown instance id '{pdb_id}'")))
}

impl Instance {
    pub fn n_residues(&self) -> usize {
        self.sequence.len()
    }

    pub fn supports(&self, kind: LatticeKind) -> bool {
        self.lattices.contains(&kind)
    }

    /// (lattice, qubit count) for every supported lattice.
    pub fn qubit_counts(&self) -> Vec<(LatticeKind, usize)> {
        self.lattices
            .iter()
            .map(|&k| (k, qubit_count(k, self.n_residues()).expect("registry is valid")))
            .collect()
    }
}
