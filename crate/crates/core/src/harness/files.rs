//! Text formats for the manifest, per-party credentials, receipts and
//! choice scripts. Every format is line based; lines starting with `#` are
//! comments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::HarnessError;
use crate::crypto::{payload_capacity, KeyRole, Password, SymmetricKey};
use crate::election::{
    AdminCredential, BallotPackage, CandidateSet, CounterCredential, ElectionSetup, IdToken,
    PublicParams, RosterEntry, VoterCredential,
};
use crate::numtheory::GroupParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Simulated,
    Socket,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulated => "simulated",
            Mode::Socket => "socket",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub public: PublicParams,
    pub mode: Mode,
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str, &str)> {
    text.lines().enumerate().filter_map(|(n, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let (k, v) = line.split_once(':').unwrap_or((line, ""));
        Some((n + 1, k.trim(), v.trim()))
    })
}

fn manifest_err(line: usize, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Manifest(format!("line {line}: {msg}"))
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let p = &self.public;
        let mut out = String::from("# enkvote election manifest\n");
        out += &format!("group: {}\n", p.group.to_text());
        out += &format!("candidate_bits: {}\n", p.candidates.bits());
        for (label, code) in p.candidates.labels().iter().zip(p.candidates.codes()) {
            out += &format!("candidate: {label}={}\n", hex::encode(code));
        }
        out += &format!("voters: {}\n", p.voters);
        out += &format!("password_bits: {}\n", p.password_bits);
        out += &format!("mode: {}\n", self.mode.name());
        out
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut group = None;
        let mut bits = None;
        let mut labels = Vec::new();
        let mut codes = Vec::new();
        let mut voters = None;
        let mut password_bits = None;
        let mut mode = Mode::Simulated;
        for (n, key, value) in lines(text) {
            match key {
                "group" => {
                    group = Some(GroupParams::from_text(value).map_err(|e| manifest_err(n, e))?)
                }
                "candidate_bits" => {
                    bits = Some(value.parse::<u32>().map_err(|e| manifest_err(n, e))?)
                }
                "candidate" => {
                    let (label, code) = value
                        .split_once('=')
                        .ok_or_else(|| manifest_err(n, "expected label=hex"))?;
                    labels.push(label.trim().to_string());
                    codes.push(hex::decode(code.trim()).map_err(|e| manifest_err(n, e))?);
                }
                "voters" => voters = Some(value.parse::<usize>().map_err(|e| manifest_err(n, e))?),
                "password_bits" => {
                    password_bits = Some(value.parse::<u32>().map_err(|e| manifest_err(n, e))?)
                }
                "mode" => {
                    mode = match value {
                        "simulated" => Mode::Simulated,
                        "socket" => Mode::Socket,
                        other => return Err(manifest_err(n, format!("unknown mode {other:?}"))),
                    }
                }
                other => return Err(manifest_err(n, format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| HarnessError::Manifest(format!("missing {k}"));
        let group = group.ok_or_else(|| missing("group"))?;
        let bits = bits.ok_or_else(|| missing("candidate_bits"))?;
        let voters = voters.ok_or_else(|| missing("voters"))?;
        let password_bits = password_bits.ok_or_else(|| missing("password_bits"))?;
        if voters == 0 {
            return Err(HarnessError::Manifest(
                "an election needs at least one voter".into(),
            ));
        }
        if codes.len() < 2 {
            return Err(HarnessError::Manifest(format!(
                "an election needs at least 2 candidates, got {}",
                codes.len()
            )));
        }
        let candidates = CandidateSet::new(bits, codes, labels)
            .map_err(|e| HarnessError::Manifest(e.to_string()))?;
        let public = PublicParams {
            group,
            candidates,
            voters,
            password_bits,
        };
        if public.y_len() > payload_capacity(&public.group) {
            return Err(HarnessError::Manifest(format!(
                "a {}-octet ballot does not fit the group",
                public.y_len()
            )));
        }
        Ok(Manifest { public, mode })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(&read(path)?)
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// Writes `text` to `path`, readable by the owner only.
pub fn write_private(path: &Path, text: &str) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(format!("{}: {e}", path.display()));
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    let mut f = opts.open(path).map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        f.set_permissions(fs::Permissions::from_mode(0o600))
            .map_err(io)?;
    }
    f.write_all(text.as_bytes()).map_err(io)
}

pub fn write_public(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

/// A party's credential file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Credential {
    Admin(AdminCredential),
    Counter(CounterCredential),
    Voter(VoterCredential),
}

struct Fields<'a> {
    items: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn get(&self, key: &str) -> Result<&'a str, HarnessError> {
        self.items
            .iter()
            .find(|(_, k, _)| *k == key)
            .map(|(_, _, v)| *v)
            .ok_or_else(|| HarnessError::Credential(format!("missing {key}")))
    }

    fn key(&self, key: &str, role: KeyRole) -> Result<SymmetricKey, HarnessError> {
        SymmetricKey::from_hex(self.get(key)?, role).map_err(|e| cred_err(key, e))
    }

    fn password(&self, key: &str) -> Result<Password, HarnessError> {
        Password::from_labeled_hex(self.get(key)?).map_err(|e| cred_err(key, e))
    }
}

fn cred_err(key: &str, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Credential(format!("{key}: {e}"))
}

fn parse_id(text: &str) -> Result<IdToken, HarnessError> {
    IdToken::from_hex(text).map_err(|e| cred_err("id", e))
}

impl Credential {
    pub fn to_text(&self) -> String {
        match self {
            Credential::Admin(a) => {
                let mut out = String::from("role: admin\n");
                out += &format!("k_va: {}\n", a.k_va.to_hex());
                out += &format!("k_ac: {}\n", a.k_ac.to_hex());
                out += &format!("p_ac: {}\n", a.p_ac.to_labeled_hex());
                for r in &a.roster {
                    out += &format!(
                        "voter: {} {} {}\n",
                        r.index,
                        r.id.to_hex(),
                        r.p_av.to_labeled_hex()
                    );
                }
                out
            }
            Credential::Counter(c) => format!(
                "role: counter\nk_ac: {}\nk_vc: {}\np_ac: {}\np_vc: {}\n",
                c.k_ac.to_hex(),
                c.k_vc.to_hex(),
                c.p_ac.to_labeled_hex(),
                c.p_vc.to_labeled_hex()
            ),
            Credential::Voter(v) => format!(
                "role: voter\nindex: {}\nid: {}\np_av: {}\np_vc: {}\nk_va: {}\nk_vc: {}\n",
                v.index,
                v.id.to_hex(),
                v.p_av.to_labeled_hex(),
                v.p_vc.to_labeled_hex(),
                v.k_va.to_hex(),
                v.k_vc.to_hex()
            ),
        }
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let f = Fields {
            items: lines(text).collect(),
        };
        match f.get("role")? {
            "admin" => {
                let mut roster = Vec::new();
                for (_, k, v) in &f.items {
                    if *k != "voter" {
                        continue;
                    }
                    let parts: Vec<&str> = v.split_whitespace().collect();
                    let [index, id, p_av] = parts[..] else {
                        return Err(cred_err("voter", "expected `index id bits:hex`"));
                    };
                    roster.push(RosterEntry {
                        index: index.parse().map_err(|e| cred_err("voter", e))?,
                        id: parse_id(id)?,
                        p_av: Password::from_labeled_hex(p_av).map_err(|e| cred_err("voter", e))?,
                    });
                }
                Ok(Credential::Admin(AdminCredential {
                    k_va: f.key("k_va", KeyRole::Va)?,
                    k_ac: f.key("k_ac", KeyRole::Ac)?,
                    p_ac: f.password("p_ac")?,
                    roster,
                }))
            }
            "counter" => Ok(Credential::Counter(CounterCredential {
                k_ac: f.key("k_ac", KeyRole::Ac)?,
                k_vc: f.key("k_vc", KeyRole::Vc)?,
                p_ac: f.password("p_ac")?,
                p_vc: f.password("p_vc")?,
            })),
            "voter" => Ok(Credential::Voter(VoterCredential {
                index: f.get("index")?.parse().map_err(|e| cred_err("index", e))?,
                id: parse_id(f.get("id")?)?,
                p_av: f.password("p_av")?,
                p_vc: f.password("p_vc")?,
                k_va: f.key("k_va", KeyRole::Va)?,
                k_vc: f.key("k_vc", KeyRole::Vc)?,
            })),
            other => Err(HarnessError::Credential(format!("unknown role {other:?}"))),
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(&read(path)?)
    }

    pub fn into_admin(self) -> Result<AdminCredential, HarnessError> {
        match self {
            Credential::Admin(a) => Ok(a),
            _ => Err(HarnessError::Credential(
                "not an administrator credential".into(),
            )),
        }
    }

    pub fn into_counter(self) -> Result<CounterCredential, HarnessError> {
        match self {
            Credential::Counter(c) => Ok(c),
            _ => Err(HarnessError::Credential("not a counter credential".into())),
        }
    }

    pub fn into_voter(self) -> Result<VoterCredential, HarnessError> {
        match self {
            Credential::Voter(v) => Ok(v),
            _ => Err(HarnessError::Credential("not a voter credential".into())),
        }
    }
}

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const ADMIN_FILE: &str = "admin.cred";
pub const COUNTER_FILE: &str = "counter.cred";

pub fn voter_file(index: usize) -> String {
    format!("voter-{:04}.cred", index + 1)
}

pub fn receipt_file(index: usize) -> String {
    format!("voter-{:04}.receipt", index + 1)
}

/// Writes the manifest and every credential file into `dir`.
pub fn write_setup(dir: &Path, setup: &ElectionSetup, mode: Mode) -> Result<PathBuf, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    let manifest = Manifest {
        public: setup.public.clone(),
        mode,
    };
    let path = dir.join(MANIFEST_FILE);
    write_public(&path, &manifest.to_text())?;
    write_private(
        &dir.join(ADMIN_FILE),
        &Credential::Admin(setup.admin.clone()).to_text(),
    )?;
    write_private(
        &dir.join(COUNTER_FILE),
        &Credential::Counter(setup.counter.clone()).to_text(),
    )?;
    for v in &setup.voters {
        write_private(
            &dir.join(voter_file(v.index)),
            &Credential::Voter(v.clone()).to_text(),
        )?;
    }
    Ok(path)
}

/// Reads back what [`write_setup`] wrote, from the manifest's directory.
pub fn load_setup(manifest_path: &Path) -> Result<(Manifest, ElectionSetup), HarnessError> {
    let manifest = Manifest::load(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let admin = Credential::load(&dir.join(ADMIN_FILE))?.into_admin()?;
    let counter = Credential::load(&dir.join(COUNTER_FILE))?.into_counter()?;
    let voters = (0..manifest.public.voters)
        .map(|i| Credential::load(&dir.join(voter_file(i)))?.into_voter())
        .collect::<Result<Vec<_>, _>>()?;
    if admin.roster.len() != voters.len() {
        return Err(HarnessError::Manifest(format!(
            "roster lists {} voters, manifest {}",
            admin.roster.len(),
            voters.len()
        )));
    }
    let setup = ElectionSetup {
        public: manifest.public.clone(),
        admin,
        counter,
        voters,
    };
    Ok((manifest, setup))
}

/// A voter's record of what it submitted: `Y` in hex.
pub fn receipt_text(package: &BallotPackage) -> String {
    format!("y: {}\n", hex::encode(package.y_bytes()))
}

pub fn parse_receipt(text: &str, public: &PublicParams) -> Result<BallotPackage, HarnessError> {
    let y = lines(text)
        .find(|(_, k, _)| *k == "y")
        .map(|(_, _, v)| v)
        .ok_or_else(|| HarnessError::Credential("receipt has no y line".into()))?;
    let bytes = hex::decode(y).map_err(|e| cred_err("y", e))?;
    Ok(BallotPackage::from_y_bytes(
        &bytes,
        public.candidates.code_len(),
    )?)
}

/// One line per voter in roster order: a candidate label, a 1-based
/// candidate number, or `-` for a voter who never submits.
pub fn parse_choices(
    text: &str,
    public: &PublicParams,
) -> Result<Vec<Option<usize>>, HarnessError> {
    let labels = public.candidates.labels();
    let mut out = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let choice = if line == "-" {
            None
        } else if let Some(pos) = labels.iter().position(|l| l == line) {
            Some(pos + 1)
        } else {
            match line.parse::<usize>() {
                Ok(k) if (1..=labels.len()).contains(&k) => Some(k),
                _ => {
                    return Err(HarnessError::Choices(format!(
                        "{line:?} is not a candidate"
                    )))
                }
            }
        };
        out.push(choice);
    }
    if out.len() != public.voters {
        return Err(HarnessError::Choices(format!(
            "{} choices for {} voters",
            out.len(),
            public.voters
        )));
    }
    Ok(out)
}
