//! Exhaustive METEOR: enumerates every one-to-one matching over stem-equal
//! token pairs and keeps the best by (total matches, exact matches, fewest chunks).

use hprr_core::textproc::stem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub matches: usize,
    pub exact: usize,
    pub chunks: usize,
    pub score: f64,
}

pub fn oracle_meteor(cand: &[String], refr: &[String]) -> OracleResult {
    let cs: Vec<String> = cand.iter().map(|t| stem(t)).collect();
    let rs: Vec<String> = refr.iter().map(|t| stem(t)).collect();
    let mut used = vec![false; refr.len()];
    let mut pairs: Vec<(usize, usize, bool)> = Vec::new();
    let mut best: Option<(usize, usize, usize)> = None;
    enumerate(cand, refr, &cs, &rs, 0, &mut used, &mut pairs, &mut best);
    let (m, exact, chunks) = best.unwrap_or((0, 0, 0));
    let score = if m == 0 {
        0.0
    } else {
        let p = m as f64 / cand.len() as f64;
        let r = m as f64 / refr.len() as f64;
        let fmean = 10.0 * p * r / (r + 9.0 * p);
        let pen = 0.5 * (chunks as f64 / m as f64).powi(3);
        fmean * (1.0 - pen)
    };
    OracleResult { matches: m, exact, chunks, score }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    cand: &[String],
    refr: &[String],
    cs: &[String],
    rs: &[String],
    i: usize,
    used: &mut [bool],
    pairs: &mut Vec<(usize, usize, bool)>,
    best: &mut Option<(usize, usize, usize)>,
) {
    if i == cand.len() {
        let m = pairs.len();
        let exact = pairs.iter().filter(|p| p.2).count();
        let mut chunks = 0;
        for k in 0..m {
            if k == 0 || pairs[k].0 != pairs[k - 1].0 + 1 || pairs[k].1 != pairs[k - 1].1 + 1 {
                chunks += 1;
            }
        }
        let better = match *best {
            None => true,
            Some((bm, be, bc)) => (m, exact, std::cmp::Reverse(chunks)) > (bm, be, std::cmp::Reverse(bc)),
        };
        if better {
            *best = Some((m, exact, chunks));
        }
        return;
    }
    enumerate(cand, refr, cs, rs, i + 1, used, pairs, best);
    for j in 0..refr.len() {
        if !used[j] && cs[i] == rs[j] {
            used[j] = true;
            pairs.push((i, j, cand[i] == refr[j]));
            enumerate(cand, refr, cs, rs, i + 1, used, pairs, best);
            pairs.pop();
            used[j] = false;
        }
    }
}
