use std::collections::HashSet;
use std::fmt::Write as _;

use super::types::{CandidateSet, IdToken, VERIF_LEN};
use super::ElectionError;
use crate::crypto::MacTag;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoardRow {
    pub entry: usize,
    pub ballot: Vec<u8>,
    pub verif: [u8; VERIF_LEN],
    pub tag_va: MacTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoardStatus {
    Open,
    Closed,
}

/// The counter's public record. Rows are append-only while open; tallies are
/// only available once closed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BulletinBoard {
    rows: Vec<BoardRow>,
    status: BoardStatus,
    failed_ids: Vec<IdToken>,
    verifs: HashSet<[u8; VERIF_LEN]>,
}

impl Default for BulletinBoard {
    fn default() -> Self {
        Self::new()
    }
}

impl BulletinBoard {
    pub fn new() -> Self {
        BulletinBoard {
            rows: Vec::new(),
            status: BoardStatus::Open,
            failed_ids: Vec::new(),
            verifs: HashSet::new(),
        }
    }

    pub fn rows(&self) -> &[BoardRow] {
        &self.rows
    }

    /// Mutable rows, for fault injection by a dishonest counter.
    pub fn rows_mut(&mut self) -> &mut [BoardRow] {
        &mut self.rows
    }

    pub fn status(&self) -> BoardStatus {
        self.status
    }

    pub fn failed_ids(&self) -> &[IdToken] {
        &self.failed_ids
    }

    pub fn contains_verif(&self, verif: &[u8; VERIF_LEN]) -> bool {
        self.verifs.contains(verif)
    }

    /// Appends a row and returns its entry number.
    pub fn append(
        &mut self,
        ballot: Vec<u8>,
        verif: [u8; VERIF_LEN],
        tag_va: MacTag,
    ) -> Result<usize, ElectionError> {
        if self.status != BoardStatus::Open {
            return Err(ElectionError::State("board is closed".into()));
        }
        if !self.verifs.insert(verif) {
            return Err(ElectionError::State(
                "verification string already on the board".into(),
            ));
        }
        let entry = self.rows.len() + 1;
        self.rows.push(BoardRow {
            entry,
            ballot,
            verif,
            tag_va,
        });
        Ok(entry)
    }

    pub fn close(&mut self, failed_ids: Vec<IdToken>) {
        self.status = BoardStatus::Closed;
        self.failed_ids = failed_ids;
    }

    /// Reopens a closed board for a revote round. Existing rows stay.
    pub fn reopen(&mut self) -> Result<(), ElectionError> {
        if self.status != BoardStatus::Closed {
            return Err(ElectionError::State("board is already open".into()));
        }
        self.status = BoardStatus::Open;
        self.failed_ids.clear();
        Ok(())
    }

    /// Count per candidate, in candidate order. Ballots matching no candidate
    /// cannot be on the board, but a tampered row would be skipped here.
    pub fn tally(&self, candidates: &CandidateSet) -> Result<Vec<(String, usize)>, ElectionError> {
        if self.status != BoardStatus::Closed {
            return Err(ElectionError::State(
                "no tally while the board is open".into(),
            ));
        }
        let mut counts = vec![0usize; candidates.len()];
        for row in &self.rows {
            if let Some(i) = candidates.position(&row.ballot) {
                counts[i] += 1;
            }
        }
        Ok(candidates.labels().iter().cloned().zip(counts).collect())
    }

    /// Text export: one `entry,ballot_hex,verif_hex,tag_hex` line per row,
    /// then `TALLY label=count` lines, then `FAILED id_hex` lines.
    pub fn export(&self, candidates: &CandidateSet) -> Result<String, ElectionError> {
        let tally = self.tally(candidates)?;
        let mut out = String::new();
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                row.entry,
                hex::encode(&row.ballot),
                hex::encode(row.verif),
                hex::encode(row.tag_va.to_bytes())
            )
            .expect("writing to a String");
        }
        for (label, count) in tally {
            writeln!(out, "TALLY {label}={count}").expect("writing to a String");
        }
        for id in &self.failed_ids {
            writeln!(out, "FAILED {}", id.to_hex()).expect("writing to a String");
        }
        Ok(out)
    }

    /// Parses an export back into a closed board. The TALLY lines are
    /// recomputed from the rows and must agree.
    pub fn from_export(text: &str, candidates: &CandidateSet) -> Result<Self, ElectionError> {
        let mut board = BulletinBoard::new();
        let mut tally_lines = Vec::new();
        let mut failed = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let bad = |what: &str| ElectionError::Format(format!("line {}: {what}", n + 1));
            if let Some(rest) = line.strip_prefix("TALLY ") {
                let (label, count) = rest.split_once('=').ok_or_else(|| bad("tally line"))?;
                let count: usize = count.parse().map_err(|_| bad("tally count"))?;
                tally_lines.push((label.to_string(), count));
            } else if let Some(rest) = line.strip_prefix("FAILED ") {
                failed.push(IdToken::from_hex(rest).map_err(|_| bad("failed id"))?);
            } else {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 4 || !tally_lines.is_empty() || !failed.is_empty() {
                    return Err(bad("row"));
                }
                let entry: usize = fields[0].parse().map_err(|_| bad("entry number"))?;
                if entry != board.rows.len() + 1 {
                    return Err(bad("entries out of sequence"));
                }
                let ballot = hex::decode(fields[1]).map_err(|_| bad("ballot hex"))?;
                let verif: [u8; VERIF_LEN] = hex::decode(fields[2])
                    .ok()
                    .and_then(|v| v.try_into().ok())
                    .ok_or_else(|| bad("verification string"))?;
                let tag = hex::decode(fields[3]).map_err(|_| bad("tag hex"))?;
                let tag_va = MacTag::from_bytes(&tag).map_err(|_| bad("tag width"))?;
                board
                    .append(ballot, verif, tag_va)
                    .map_err(|_| bad("duplicate verification string"))?;
            }
        }
        board.close(failed);
        if board.tally(candidates)? != tally_lines {
            return Err(ElectionError::Format(
                "TALLY lines disagree with the rows".into(),
            ));
        }
        Ok(board)
    }
}
