//! Synthetic rows in the Telco churn CSV layout, for tests and for running
//! the benchmark without the real dataset.
//!
//! Service columns keep the real file's structure: customers without phone
//! service have `MultipleLines = "No phone service"`, customers without
//! internet have `"No internet service"` in every add-on column, and
//! `TotalCharges` is blank for zero-tenure customers.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ADDONS: [&str; 6] = [
    "OnlineSecurity",
    "OnlineBackup",
    "DeviceProtection",
    "TechSupport",
    "StreamingTV",
    "StreamingMovies",
];

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str], weights: &[f64]) -> &'a str {
    let dist = WeightedIndex::new(weights).expect("weights are positive");
    items[dist.sample(rng)]
}

fn yes_no(rng: &mut ChaCha8Rng, p_yes: f64) -> &'static str {
    if rng.gen::<f64>() < p_yes {
        "Yes"
    } else {
        "No"
    }
}

/// CSV text (header plus `rows` records) in the Telco schema.
pub fn telco_like_csv(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from(
        "customerID,gender,SeniorCitizen,Partner,Dependents,tenure,PhoneService,MultipleLines,\
         InternetService,OnlineSecurity,OnlineBackup,DeviceProtection,TechSupport,StreamingTV,\
         StreamingMovies,Contract,PaperlessBilling,PaymentMethod,MonthlyCharges,TotalCharges,Churn\n",
    );
    for i in 0..rows {
        let gender = pick(&mut rng, &["Female", "Male"], &[1.0, 1.0]);
        let senior = if rng.gen::<f64>() < 0.16 { "1" } else { "0" };
        let partner = yes_no(&mut rng, 0.48);
        let dependents = if partner == "Yes" { yes_no(&mut rng, 0.5) } else { yes_no(&mut rng, 0.15) };
        let contract = pick(&mut rng, &["Month-to-month", "One year", "Two year"], &[0.55, 0.21, 0.24]);
        let tenure: u32 = match contract {
            "Month-to-month" => rng.gen_range(0..=40),
            "One year" => rng.gen_range(6..=60),
            _ => rng.gen_range(20..=72),
        };
        let phone = yes_no(&mut rng, 0.9);
        let lines = if phone == "Yes" { yes_no(&mut rng, 0.47) } else { "No phone service" };
        let internet = pick(&mut rng, &["DSL", "Fiber optic", "No"], &[0.34, 0.44, 0.22]);
        let addons: Vec<&str> = ADDONS
            .iter()
            .map(|_| if internet == "No" { "No internet service" } else { yes_no(&mut rng, 0.4) })
            .collect();
        let paperless = yes_no(&mut rng, 0.59);
        let payment = pick(
            &mut rng,
            &["Electronic check", "Mailed check", "Bank transfer (automatic)", "Credit card (automatic)"],
            &[0.34, 0.23, 0.22, 0.21],
        );

        let mut monthly = 20.0 + rng.gen::<f64>() * 5.0;
        if phone == "Yes" {
            monthly += 5.0;
        }
        if lines == "Yes" {
            monthly += 5.0;
        }
        monthly += match internet {
            "DSL" => 25.0,
            "Fiber optic" => 45.0,
            _ => 0.0,
        };
        monthly += addons.iter().filter(|&&a| a == "Yes").count() as f64 * 5.0;
        let total = if tenure == 0 {
            String::new()
        } else {
            format!("{:.2}", monthly * f64::from(tenure) * (0.95 + rng.gen::<f64>() * 0.1))
        };

        let mut logit = -1.2;
        logit += match contract {
            "Month-to-month" => 1.3,
            "One year" => -0.4,
            _ => -1.6,
        };
        logit -= f64::from(tenure) / 30.0;
        if internet == "Fiber optic" {
            logit += 0.7;
        }
        if payment == "Electronic check" {
            logit += 0.5;
        }
        if senior == "1" {
            logit += 0.3;
        }
        let churn = if rng.gen::<f64>() < 1.0 / (1.0 + (-logit).exp()) { "Yes" } else { "No" };

        let payment_field = format!("\"{payment}\"");
        let fields: Vec<String> = [
            format!("{:04}-SYN{i:05}", i % 10_000),
            gender.into(),
            senior.into(),
            partner.into(),
            dependents.into(),
            tenure.to_string(),
            phone.into(),
            lines.into(),
            internet.into(),
        ]
        .into_iter()
        .chain(addons.iter().map(|s| s.to_string()))
        .chain([
            contract.into(),
            paperless.into(),
            payment_field,
            format!("{monthly:.2}"),
            total,
            churn.into(),
        ])
        .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
