//! Subcommand implementations.

use std::error::Error;
use std::fs;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use heckelab::galois::{self, Status};
use heckelab::hecke::{self, HeckeError};
use heckelab::maeda::{self, cache, Cache, CacheKey, P2Mode, PrimeSide};
use heckelab::modforms::{self, ModularForm};
use heckelab::qseries::{CoeffRing, QSeries, RingElem};
use heckelab::subgroups::{self, AbelianType};

use crate::output::{join, table, Output};
use crate::{CacheCommand, CacheKeyArgs, Cli, Command, FormArgs, FormName, KindArg, ModeArg};

type CmdResult = Result<Output, Box<dyn Error + Send + Sync>>;

fn ring(modulus: u64) -> Result<CoeffRing, Box<dyn Error + Send + Sync>> {
    Ok(match modulus {
        0 => CoeffRing::BigInt,
        m => CoeffRing::modulo(m)?,
    })
}

fn build_form(
    args: &FormArgs,
    precision: usize,
    ring: CoeffRing,
) -> Result<ModularForm, Box<dyn Error + Send + Sync>> {
    let base = match args.form {
        FormName::Delta => modforms::delta_in(precision, ring)?,
        FormName::C4 => modforms::c4_in(precision, ring)?,
        FormName::C6 => modforms::c6_in(precision, ring)?,
    };
    Ok(base.pow(args.power)?)
}

fn form_label(args: &FormArgs) -> String {
    let name = match args.form {
        FormName::Delta => "delta",
        FormName::C4 => "c4",
        FormName::C6 => "c6",
    };
    if args.power == 1 {
        name.to_string()
    } else {
        format!("{name}^{}", args.power)
    }
}

fn coefficient_strings(s: &QSeries) -> Vec<String> {
    (0..s.precision())
        .map(|i| s.coeff(i).expect("in range").to_string())
        .collect()
}

fn series_output(label: &str, weight: u32, s: &QSeries) -> Output {
    let coeffs = coefficient_strings(s);
    let body = json!({
        "form": label,
        "weight": weight,
        "ring": s.ring().to_string(),
        "precision": s.precision(),
        "coefficients": coeffs,
    });
    let csv = table(
        &["index", "coefficient"],
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| [i.to_string(), c.clone()]),
    );
    Output::new(&body, join(&coeffs, " ")).with_csv(csv)
}

fn open_cache(cli: &Cli) -> Result<Option<Cache>, Box<dyn Error + Send + Sync>> {
    Ok(match &cli.global.cache_dir {
        Some(dir) => Some(Cache::new(dir)?),
        None => None,
    })
}

fn failure_rows(failures: &[maeda::CongruenceFailure]) -> Vec<Vec<String>> {
    table(
        &["inputs", "lhs", "rhs", "modulus"],
        failures.iter().map(|f| {
            let inputs = f
                .inputs
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" ");
            [
                inputs,
                f.lhs.to_string(),
                f.rhs.to_string(),
                f.modulus.to_string(),
            ]
        }),
    )
}

fn congruence_output(r: &maeda::CongruenceReport) -> Output {
    let plain = if r.passed() {
        format!("{}: {} checked, 0 failures", r.family, r.checked)
    } else {
        let first: Vec<String> = r
            .failures
            .iter()
            .take(10)
            .map(|f| format!("{:?} {} != {} (mod {})", f.inputs, f.lhs, f.rhs, f.modulus))
            .collect();
        format!(
            "{}: {} checked, {} failures\n{}",
            r.family,
            r.checked,
            r.failures.len(),
            first.join("\n")
        )
    };
    Output::new(r, plain)
        .with_csv(failure_rows(&r.failures))
        .check(r.passed())
}

fn scan_output(r: &maeda::ScanReport) -> Output {
    let csv = table(&["d"], r.values.iter().map(|d| [d.to_string()]));
    Output::new(r, format!("{{{}}}", join(&r.values, ", "))).with_csv(csv)
}

fn mode(m: ModeArg) -> P2Mode {
    match m {
        ModeArg::AsStated => P2Mode::AsStated,
        ModeArg::Uniform3 => P2Mode::Uniform3,
        ModeArg::Uniform2 => P2Mode::Uniform2,
    }
}

fn cache_key(args: &CacheKeyArgs) -> CacheKey {
    match args.kind {
        KindArg::Tau => CacheKey::tau(args.precision, args.modulus),
        KindArg::DeltaPow => CacheKey::delta_pow(args.i, args.precision, args.modulus),
    }
}

#[derive(Serialize)]
struct CacheEntry {
    path: String,
    key: String,
    coefficients: Vec<String>,
}

fn cache_command(cli: &Cli, cmd: &CacheCommand) -> CmdResult {
    if let CacheCommand::Verify { path } = cmd {
        let text = fs::read_to_string(path)?;
        return Ok(match cache::decode(&text) {
            Ok((key, coeffs)) => {
                let body = json!({ "path": path.display().to_string(), "key": key.to_string(), "valid": true, "coefficients": coeffs.len() });
                Output::new(
                    &body,
                    format!("valid: {key}, {} coefficients", coeffs.len()),
                )
            }
            Err(e) => {
                let body = json!({ "path": path.display().to_string(), "valid": false, "error": e.to_string() });
                Output::new(&body, format!("invalid: {e}")).check(false)
            }
        });
    }
    let cache = open_cache(cli)?.ok_or("the cache commands need --cache-dir or HECKELAB_CACHE")?;
    let (CacheCommand::Store(args) | CacheCommand::Load(args)) = cmd else {
        unreachable!()
    };
    let key = cache_key(args);
    let series = match cmd {
        CacheCommand::Store(_) => {
            let r = ring(key.modulus)?;
            let s = modforms::delta_in(key.precision, r)?
                .into_series()
                .pow(key.i as u64)?;
            cache.store_series(&key, &s)?;
            s
        }
        _ => cache
            .load_series(&key)?
            .ok_or_else(|| format!("no cached table for {key}"))?,
    };
    let coefficients = coefficient_strings(&series);
    let entry = CacheEntry {
        path: cache.path(&key).display().to_string(),
        key: key.to_string(),
        coefficients,
    };
    let csv = table(
        &["index", "coefficient"],
        entry
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| [i.to_string(), c.clone()]),
    );
    let plain = format!("{}\n{}", entry.path, join(&entry.coefficients, " "));
    Ok(Output::new(&entry, plain).with_csv(csv))
}

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Tau { n, to } => {
            let hi = to.unwrap_or(*n);
            if *n == 0 || hi < *n {
                return Err("need 1 ≤ n ≤ to".into());
            }
            let t = modforms::tau_table(hi as usize);
            let values: Vec<(u64, String)> =
                (*n..=hi).map(|k| (k, t[k as usize].to_string())).collect();
            let plain = if to.is_none() {
                values[0].1.clone()
            } else {
                values
                    .iter()
                    .map(|(k, v)| format!("{k} {v}"))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            let body = json!({ "tau": values.iter().map(|(k, v)| json!({ "n": k, "tau": v })).collect::<Vec<_>>() });
            let csv = table(
                &["n", "tau"],
                values.iter().map(|(k, v)| [k.to_string(), v.clone()]),
            );
            Ok(Output::new(&body, plain).with_csv(csv))
        }
        Command::Qexp {
            form,
            precision,
            modulus,
        } => {
            let f = build_form(form, *precision, ring(*modulus)?)?;
            Ok(series_output(&form_label(form), f.weight(), f.series()))
        }
        Command::HeckeApply { form, n, precision } => {
            if *precision == 0 || *n == 0 {
                return Err("n and precision must be positive".into());
            }
            let input = (*precision - 1) * *n as usize + 1;
            let f = build_form(form, input, CoeffRing::BigInt)?;
            let g = hecke::hecke_apply(&f, *n, *precision)?;
            Ok(series_output(
                &format!("T_{n}({})", form_label(form)),
                g.weight(),
                g.series(),
            ))
        }
        Command::ComposeCheck { m, n, k, precision } => {
            let r = hecke::composition_check(*m, *n, *k, *precision)?;
            let plain = format!(
                "T_{m}∘T_{n} on weight {k}: {} forms, {} mismatches",
                r.forms_checked,
                r.mismatches.len()
            );
            let csv = table(
                &["basis_index", "coefficient", "lhs", "rhs"],
                r.mismatches.iter().map(|x| {
                    [
                        x.basis_index.to_string(),
                        x.coefficient.to_string(),
                        x.lhs.clone(),
                        x.rhs.clone(),
                    ]
                }),
            );
            Ok(Output::new(&r, plain).with_csv(csv).check(r.passed()))
        }
        Command::Eigen { form, n, precision } => {
            if *precision < 2 || *n == 0 {
                return Err("need n ≥ 1 and precision ≥ 2".into());
            }
            let n_us = *n as usize;
            let input = ((*precision - 1) * n_us + 1).max(n_us * (form.power as usize + 1));
            let f = build_form(form, input, CoeffRing::BigInt)?;
            match hecke::eigenvalue(&f, *n) {
                Ok(lambda) => {
                    let body = json!({ "form": form_label(form), "n": n, "eigenvalue": lambda.to_string(), "eigenform": true });
                    Ok(Output::new(&body, lambda.to_string()))
                }
                Err(HeckeError::NotEigenform { index }) => {
                    let body = json!({ "form": form_label(form), "n": n, "eigenform": false, "first_mismatch": index });
                    Ok(Output::new(
                        &body,
                        format!("not an eigenform of T_{n}: coefficient {index} disagrees"),
                    )
                    .check(false))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Bcoeff { n, e, modulus } => {
            let v: RingElem = hecke::b_coefficient(*n, *e, *modulus)?;
            let body = json!({ "n": n, "e": e, "modulus": modulus, "value": v.to_string() });
            Ok(Output::new(&body, v.to_string()))
        }
        Command::SubgroupCount { m, n, d, e } => {
            let formula = subgroups::c_formula(*m, *n, *d, *e)?;
            let g = AbelianType::rank_two(*e, m * n / e)?;
            let t = AbelianType::rank_two(*d, m / d)?;
            let census = subgroups::count_by_type(&g, &t)?;
            let body = json!({
                "ambient": g.to_string(),
                "type": t.to_string(),
                "formula": formula,
                "census": census,
                "in_index_set": subgroups::fibre_product_index(*m, *n, *d, *e),
            });
            let plain = format!("{formula} subgroups of type {t} in {g} (census {census})");
            Ok(Output::new(&body, plain).check(formula == census))
        }
        Command::SubgroupPoly { m, n, ell_table } => {
            if *ell_table {
                let rows = subgroups::format_c_ell_table(*m as u32, *n as u32);
                let body = json!({ "m": m, "n": n, "rows": rows });
                let csv = rows
                    .iter()
                    .map(|r| r.split('|').map(str::to_string).collect())
                    .collect();
                return Ok(Output::new(&body, rows.join("\n")).with_csv(csv));
            }
            let r = subgroups::c_polynomial_identity(*m, *n)?;
            let poly = |terms: &[(u64, u64)]| {
                terms
                    .iter()
                    .map(|(e, c)| format!("{c}X^{e}"))
                    .collect::<Vec<_>>()
                    .join(" + ")
            };
            let plain = format!(
                "lhs: {}\nrhs: {}\n{} mismatches",
                poly(&r.lhs),
                poly(&r.rhs),
                r.mismatches.len()
            );
            let csv = table(
                &["exponent", "lhs", "rhs"],
                r.mismatches
                    .iter()
                    .map(|x| [x.exponent.to_string(), x.lhs.to_string(), x.rhs.to_string()]),
            );
            Ok(Output::new(&r, plain).with_csv(csv).check(r.passed()))
        }
        Command::Census { n } => {
            let r = subgroups::census_identities(*n)?;
            let plain = format!(
                "order-{n} subgroups of C{n} x C{n}: {} (σ = {}); cyclic: {} (ψ = {}); {} index pairs, {} mismatches",
                r.subgroups_of_order_n,
                r.sigma,
                r.cyclic_of_order_n,
                r.psi,
                r.pairs_checked,
                r.index_mismatches.len()
            );
            Ok(Output::new(&r, plain).check(r.passed()))
        }
        Command::Charpoly { n, d } => {
            let m = galois::hecke_matrix(*n, *d)?;
            let f = galois::char_poly(&m)?;
            let coeffs: Vec<String> = f.coefficients().iter().map(BigInt::to_string).collect();
            let body =
                json!({ "n": n, "d": d, "coefficients": coeffs, "polynomial": f.to_string() });
            let csv = table(
                &["power", "coefficient"],
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| [i.to_string(), c.clone()]),
            );
            Ok(Output::new(&body, f.to_string()).with_csv(csv))
        }
        Command::CertifyGalois { n, d, budget } => {
            let m = galois::hecke_matrix(*n, *d)?;
            let f = galois::char_poly(&m)?;
            let v = galois::certify_maeda(&f, *budget);
            let witnesses: Vec<String> = v
                .witnesses
                .iter()
                .map(|w| format!("p={} {:?} ({})", w.prime, w.degrees, w.role))
                .collect();
            let plain = format!(
                "{:?} (degree {}, {} primes): {}",
                v.status,
                v.degree,
                v.budget_used,
                witnesses.join("; ")
            );
            let csv = table(
                &["prime", "degrees", "role"],
                v.witnesses.iter().map(|w| {
                    [
                        w.prime.to_string(),
                        join(&w.degrees, " "),
                        w.role.to_string(),
                    ]
                }),
            );
            Ok(Output::new(&v, plain)
                .with_csv(csv)
                .check(v.status == Status::Certified))
        }
        Command::MaedaScan3 { dmax } => Ok(scan_output(&maeda::scan_cond1_p3_report(*dmax)?)),
        Command::MaedaScan2 { dmax, mode: m } => {
            Ok(scan_output(&maeda::scan_cond1_p2_report(*dmax, mode(*m))?))
        }
        Command::MaedaCert {
            d,
            n,
            side,
            no_verify,
        } => {
            let cache = open_cache(cli)?;
            let cert =
                maeda::maeda_certificate_with(*d, *n, PrimeSide::try_from(*side)?, cache.as_ref())?;
            let verified = if *no_verify {
                None
            } else {
                Some(maeda::verify_certificate(&cert)?)
            };
            let ok = cert.verdict && verified != Some(false);
            let body = json!({ "certificate": cert, "verified": verified });
            let plain = format!(
                "T_{{{}}} on S_{{{}}}: verdict {}; a_{{{}}}(Δ^{d}) ≡ {} (mod {}); condition 1 {}, condition 2 {}{}",
                *d as u64 * n,
                12 * d,
                cert.verdict,
                *d as u64 * n,
                cert.nonvanishing_value,
                cert.modulus,
                cert.condition1.holds,
                cert.condition2,
                match verified {
                    Some(v) => format!("; verified {v}"),
                    None => String::new(),
                }
            );
            Ok(Output::new(&body, plain).check(ok))
        }
        Command::RamanujanScan { nmax, modulus } => {
            let cache = open_cache(cli)?;
            Ok(congruence_output(&maeda::ramanujan_scan_with(
                *nmax,
                *modulus,
                cache.as_ref(),
            )?))
        }
        Command::ThmEScan { emax, nmax } => {
            Ok(congruence_output(&maeda::thm_e_scan(*emax, *nmax)?))
        }
        Command::Cache(cmd) => cache_command(cli, cmd),
    }
}
