//! Population panel files: `sample pop [super_pop ...]`, whitespace separated.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use super::{GenotypeDataset, Labels};
use crate::error::{Error, Result};

/// The 26 1000 Genomes population codes and their continental regions.
pub const BUILTIN_REGIONS: [(&str, &str); 26] = [
    ("ACB", "AFR"),
    ("ASW", "AFR"),
    ("BEB", "SAS"),
    ("CDX", "EAS"),
    ("CEU", "EUR"),
    ("CHB", "EAS"),
    ("CHS", "EAS"),
    ("CLM", "AMR"),
    ("ESN", "AFR"),
    ("FIN", "EUR"),
    ("GBR", "EUR"),
    ("GIH", "SAS"),
    ("GWD", "AFR"),
    ("IBS", "EUR"),
    ("ITU", "SAS"),
    ("JPT", "EAS"),
    ("KHV", "EAS"),
    ("LWK", "AFR"),
    ("MSL", "AFR"),
    ("MXL", "AMR"),
    ("PEL", "AMR"),
    ("PJL", "SAS"),
    ("PUR", "AMR"),
    ("STU", "SAS"),
    ("TSI", "EUR"),
    ("YRI", "AFR"),
];

pub fn builtin_region(population: &str) -> Option<&'static str> {
    BUILTIN_REGIONS
        .iter()
        .find(|(p, _)| *p == population)
        .map(|(_, r)| *r)
}

struct PanelRow {
    population: String,
    region: Option<String>,
}

/// Attaches population labels to `dataset`.
///
/// Samples are matched on their full id first and then on the IID part
/// (text after the first `_`), which is how PLINK names samples imported
/// from VCF. Regions come from `region_table` when given, otherwise from the
/// panel's third column, otherwise from [`BUILTIN_REGIONS`]. The class
/// vocabulary is sorted.
pub fn parse_panel<R: BufRead>(
    reader: R,
    dataset: &GenotypeDataset,
    region_table: Option<&BTreeMap<String, String>>,
) -> Result<GenotypeDataset> {
    let mut rows: HashMap<String, PanelRow> = HashMap::new();
    let mut first = true;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.is_empty() || toks[0].starts_with('#') {
            continue;
        }
        if first && toks[0].eq_ignore_ascii_case("sample") {
            first = false;
            continue;
        }
        first = false;
        if toks.len() < 2 {
            return Err(Error::parse(
                idx + 1,
                2,
                "panel row needs a population column",
            ));
        }
        rows.insert(
            toks[0].to_string(),
            PanelRow {
                population: toks[1].to_string(),
                region: toks.get(2).map(|s| s.to_string()),
            },
        );
    }

    let mut per_sample = Vec::with_capacity(dataset.n_samples());
    for id in &dataset.sample_ids {
        let row = rows
            .get(id)
            .or_else(|| id.split_once('_').and_then(|(_, iid)| rows.get(iid)))
            .ok_or_else(|| Error::SampleNotInPanel(id.clone()))?;
        per_sample.push(row);
    }

    let classes: Vec<String> = per_sample
        .iter()
        .map(|r| r.population.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut class_region: Vec<String> = Vec::with_capacity(classes.len());
    for class in &classes {
        let region = match region_table {
            Some(table) => table
                .get(class)
                .cloned()
                .ok_or_else(|| Error::UnknownPopulation(class.clone()))?,
            None => {
                let from_column: BTreeSet<&str> = per_sample
                    .iter()
                    .filter(|r| &r.population == class)
                    .filter_map(|r| r.region.as_deref())
                    .collect();
                match from_column.len() {
                    0 => builtin_region(class)
                        .map(str::to_string)
                        .ok_or_else(|| Error::UnknownPopulation(class.clone()))?,
                    1 => from_column.into_iter().next().unwrap().to_string(),
                    _ => {
                        return Err(Error::arg(format!(
                            "population `{class}` is assigned to several regions"
                        )))
                    }
                }
            }
        };
        class_region.push(region);
    }

    let regions: Vec<String> = class_region
        .iter()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let region_of = class_region
        .iter()
        .map(|r| regions.binary_search(r).unwrap())
        .collect();
    let labels = per_sample
        .iter()
        .map(|r| classes.binary_search(&r.population).unwrap())
        .collect();

    let mut out = dataset.clone();
    out.labels = Some(Labels {
        labels,
        classes,
        regions,
        region_of,
    });
    Ok(out)
}

/// Writes a panel with a `sample pop super_pop` header, keyed by IID.
pub fn write_panel<W: Write>(ds: &GenotypeDataset, mut w: W) -> Result<()> {
    let labels = ds.labels()?;
    writeln!(w, "sample\tpop\tsuper_pop")?;
    for (id, &c) in ds.sample_ids.iter().zip(&labels.labels) {
        let iid = id.split_once('_').map_or(id.as_str(), |(_, iid)| iid);
        writeln!(
            w,
            "{iid}\t{}\t{}",
            labels.classes[c], labels.regions[labels.region_of[c]]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn unlabeled(ids: &[&str]) -> GenotypeDataset {
        GenotypeDataset {
            genotypes: Array2::zeros((ids.len(), 1)),
            sample_ids: ids.iter().map(|s| s.to_string()).collect(),
            snp_ids: vec!["rs1".into()],
            labels: None,
        }
    }

    #[test]
    fn sorted_vocabulary() {
        let ds = unlabeled(&["a_s1", "b_s2", "c_s3"]);
        let panel =
            "sample pop super_pop gender\ns1 GBR EUR male\ns2 GBR EUR female\ns3 YRI AFR male\n";
        let out = parse_panel(panel.as_bytes(), &ds, None).unwrap();
        let l = out.labels.unwrap();
        assert_eq!(l.classes, vec!["GBR", "YRI"]);
        assert_eq!(l.labels, vec![0, 0, 1]);
        assert_eq!(l.regions, vec!["AFR", "EUR"]);
        assert_eq!(l.region_of, vec![1, 0]);
    }

    #[test]
    fn missing_sample_named() {
        let ds = unlabeled(&["a_s1", "b_s9"]);
        let err = parse_panel("s1 GBR\n".as_bytes(), &ds, None).unwrap_err();
        match err {
            Error::SampleNotInPanel(id) => assert_eq!(id, "b_s9"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn supplied_table_must_cover_classes() {
        let ds = unlabeled(&["s1", "s2"]);
        let table: BTreeMap<String, String> = [("GBR".to_string(), "EUR".to_string())]
            .into_iter()
            .collect();
        let err = parse_panel("s1 GBR\ns2 XXX\n".as_bytes(), &ds, Some(&table)).unwrap_err();
        assert!(matches!(err, Error::UnknownPopulation(p) if p == "XXX"));
    }

    #[test]
    fn builtin_table_gives_five_regions() {
        let ids: Vec<String> = (0..26).map(|i| format!("f_s{i}")).collect();
        let refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        let ds = unlabeled(&refs);
        let panel: String = BUILTIN_REGIONS
            .iter()
            .enumerate()
            .map(|(i, (p, _))| format!("s{i} {p}\n"))
            .collect();
        let out = parse_panel(panel.as_bytes(), &ds, None).unwrap();
        let l = out.labels.unwrap();
        assert_eq!(l.n_classes(), 26);
        assert_eq!(l.regions, vec!["AFR", "AMR", "EAS", "EUR", "SAS"]);
    }

    #[test]
    fn write_then_parse() {
        let ds = unlabeled(&["a_s1", "b_s2", "c_s3"]);
        let labeled = parse_panel("s1 CEU\ns2 JPT\ns3 CEU\n".as_bytes(), &ds, None).unwrap();
        let mut buf = Vec::new();
        write_panel(&labeled, &mut buf).unwrap();
        let again = parse_panel(buf.as_slice(), &ds, None).unwrap();
        assert_eq!(again, labeled);
    }
}
