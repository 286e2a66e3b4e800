//! Regenerates the scenario fixtures and the mock evaluation script under
//! `fixtures/`. Run from the crate root: `cargo run --example build_fixtures`.

use std::path::Path;

use guidebench::scenario::{
    audit_needle_case, build_geo_pair, bundled_schedule, extract_decision_nodes, write_scenarios,
    AnswerKey, BiasCase, BiasType, DecisionVignette, GeoTemplate, ManagementKey, Needle,
    NeedleCase, Scenario,
};
use guidebench::vocab::Vocabulary;
use serde_json::{json, Value};

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

const DECISION_NARRATIVE: &str = "A 14-month-old girl is brought to a health centre in Kisumu \
    with a cough for three days and difficulty breathing since last night. Her mother says she \
    has been more tired than usual.";

fn decision(vocab: &Vocabulary) -> Vec<Scenario> {
    let flow = std::fs::read_to_string("fixtures/flows/imnci.flow").expect("flow fixture");
    let nodes = extract_decision_nodes(&flow, vocab).expect("flow parses").nodes;
    let v = |id: &str, max_turns: usize| {
        Scenario::Decision(DecisionVignette {
            vignette_id: id.into(),
            narrative: DECISION_NARRATIVE.into(),
            hidden_nodes: nodes.clone(),
            answer_key: AnswerKey {
                diagnosis: "pneumonia".into(),
                management: "Oral amoxicillin twice daily for five days; refer if SpO2 below 90%."
                    .into(),
            },
            max_turns,
            query_token_cap: 60,
        })
    };
    vec![
        v("dec-perfect", 20),
        v("dec-partial", 20),
        v("dec-immediate", 20),
        v("dec-never", 4),
    ]
}

const BENTIU: &str = "A 9-year-old boy is brought to the outpatient clinic of a county referral \
hospital in Kisumu by his aunt. She explains that he has had fevers on and off for about six \
weeks. The fevers come mostly in the afternoon and evening and are followed by heavy sweating at \
night. He has lost interest in food, and his school uniform has become loose around the waist. \
His aunt has given him paracetamol from the local chemist and, two weeks ago, a full course of \
artemether-lumefantrine after a private clinic told her it was malaria, but the fevers did not \
stop. He has a mild dry cough but no chest pain, no diarrhoea and no blood in the urine or stool. \
There is no known contact with anyone who has a chronic cough. The family keeps two goats and \
chickens, and the boy sometimes drinks milk bought at the market. His aunt mentions that he and \
his mother spent the last year living in a displacement camp in Bentiu, South Sudan, before \
joining her in Kenya three months ago. His immunisations were completed in infancy according to \
the card his mother kept. On examination he is thin and pale, with a weight-for-age below the \
third centile. The temperature is 38.6 C, pulse 118 per minute and breathing rate 24 per minute. \
There is no jaundice and no lymph node enlargement in the neck. The abdomen is soft but \
distended, and the spleen is palpable eight centimetres below the left costal margin, firm and \
non-tender. The liver edge is felt two centimetres below the right costal margin. The chest is \
clear. There are no skin lesions apart from a healed scar on the left knee. A malaria rapid \
diagnostic test done today is negative. The haemoglobin is 7.1 g/dL, white cell count 2.8 x10^9/L \
and platelets 96 x10^9/L. A Widal test requested by the private clinic last week was reported as \
weakly positive, and the aunt has brought the slip with her. A chest radiograph has not been done. \
HIV testing has not been offered before. The aunt is worried because the boy is now missing \
school and has little energy to play with his cousins. She asks whether he needs more malaria \
medicine or whether something else is going on, and whether the family can manage his care \
closer to home.";

const GARISSA: &str = "A 34-year-old man who herds camels and goats near Garissa comes to a \
sub-county hospital with fever, headache and aching joints for three weeks. The fever rises in the \
evening and settles by morning, leaving him drenched in sweat. He describes a dull ache in the \
lower back and both knees, worse after walking to the water point. He has felt tired and has lost \
some weight, although he cannot say how much. He took an antimalarial from a shop last week with \
no improvement, and a course of amoxicillin before that. He has no cough, no diarrhoea, no rash \
and no bleeding from the gums or nose. He lives with his wife and three children, who are well. \
During the recent dry season several of his goats gave birth to stillborn kids, and he helped \
with the deliveries without gloves. He says he drinks unboiled camel milk every day, which is the \
main part of his diet while moving with the herd. He has not travelled outside the county and has \
not slept away from the herd in the last two months. He does not smoke and rarely drinks alcohol. \
On examination he looks unwell but is alert. His temperature is 38.9 C, pulse 104 per minute and \
blood pressure 118/74. There is no neck stiffness. Several small lymph nodes are palpable in both \
groins. The spleen tip is just palpable and the liver is not enlarged. The right knee is warm with \
a small effusion, and there is tenderness over the lower lumbar spine and the right sacroiliac \
joint. The heart sounds are normal with no murmur. A malaria rapid test is negative. The \
haemoglobin is 11.8 g/dL, white cell count 4.1 x10^9/L with a relative lymphocytosis, and \
platelets 182 x10^9/L. A urine dipstick is normal. The clinician in the outpatient department \
notes that typhoid has been reported in the town this month and that a tuberculosis screening \
sputum could be sent. The patient wants medicine that will let him return to the herd quickly, \
because the long rains are expected soon and the animals must be moved to new grazing. He asks \
whether he needs an injection and how long he will have to stay.";

fn needle() -> Vec<Scenario> {
    let cases = vec![
        NeedleCase {
            case_id: "needle-bentiu-kala-azar".into(),
            narrative: BENTIU.into(),
            needle: Needle {
                clue_text: "spent the last year living in a displacement camp in Bentiu, South Sudan"
                    .into(),
                patterns: strings(&[r"\bbentiu\b", r"south\s+sudan"]),
                implication_terms: strings(&["endemic area|travel history|displacement camp"]),
            },
            target_disease: "visceral leishmaniasis".into(),
            distractor_diagnoses: strings(&["malaria", "typhoid", "tuberculosis", "brucellosis"]),
            management_key: ManagementKey {
                text: "Confirm with an rK39 rapid test and treat with sodium stibogluconate plus \
                       paromomycin at a designated treatment centre."
                    .into(),
                required_elements: strings(&[
                    "rk39|rk 39|splenic aspirate",
                    "sodium stibogluconate|ssg|paromomycin|amphotericin",
                ]),
            },
            locale: "Kenya".into(),
        },
        NeedleCase {
            case_id: "needle-garissa-brucellosis".into(),
            narrative: GARISSA.into(),
            needle: Needle {
                clue_text: "drinks unboiled camel milk every day".into(),
                patterns: strings(&[r"(raw|unboiled|unpasteuri[sz]ed)\s+(camel\s+)?milk"]),
                implication_terms: strings(&["camel milk|raw milk"]),
            },
            target_disease: "brucellosis".into(),
            distractor_diagnoses: strings(&["malaria", "typhoid", "tuberculosis", "visceral leishmaniasis"]),
            management_key: ManagementKey {
                text: "Send brucella serology and treat with doxycycline for six weeks plus an \
                       aminoglycoside or rifampicin."
                    .into(),
                required_elements: strings(&["doxycycline", "rifampicin|gentamicin|streptomycin"]),
            },
            locale: "Kenya".into(),
        },
    ];
    for c in &cases {
        let audit = audit_needle_case(c);
        assert!(audit.passed(), "{}: {audit:?}", c.case_id);
    }
    cases.into_iter().map(Scenario::Needle).collect()
}

fn reverse() -> Vec<Scenario> {
    let v = json!({
        "kind": "reverse",
        "persona": {
            "persona_id": "persona-diarrhoea-kisumu",
            "demographics": {"age": "18 months", "caregiver_role": "mother", "county": "Kisumu"},
            "affect": "worried",
            "facts": [
                {"fact_id": "duration", "topic": "How long the diarrhoea has lasted",
                 "answer": "Diarrhoea for 3 days", "keywords": ["days"]},
                {"fact_id": "stools", "topic": "Stool frequency",
                 "answer": "Watery stools about 6 times a day", "keywords": ["6 times|six times"]},
                {"fact_id": "vomiting", "topic": "Vomiting",
                 "answer": "Vomited 2 times today", "keywords": ["vomited|vomiting|vomit"]},
                {"fact_id": "urine", "topic": "Urine output",
                 "answer": "No urine since this morning", "keywords": ["urine|mkojo"]},
                {"fact_id": "drinking", "topic": "Drinking",
                 "answer": "Drinks eagerly when offered water", "keywords": ["drinks|drinking|drink"]},
                {"fact_id": "blood", "topic": "Blood in stool",
                 "answer": "No blood in the stool", "keywords": ["blood"]},
                {"fact_id": "fever", "topic": "Fever",
                 "answer": "Felt warm yesterday but no fever today", "keywords": ["warm|fever"]}
            ],
            "locale_phrases": [
                {"text": "hakuna mkojo", "variants": ["hakuna mkojo kabisa"], "topic": "urine"}
            ]
        },
        "script": [
            {"text": "How long has the diarrhoea been going on?", "fact_ids": ["duration"]},
            {"text": "How many times a day is she passing stool?", "fact_ids": ["stools"]},
            {"text": "Has she been vomiting?", "fact_ids": ["vomiting"]},
            {"text": "When did she last pass urine?", "fact_ids": ["urine"]},
            {"text": "Is she able to drink?", "fact_ids": ["drinking"]},
            {"text": "Have you seen any blood in the stool?", "fact_ids": ["blood"]},
            {"text": "Has she had a fever?", "fact_ids": ["fever"]},
            {"text": "So the diarrhoea started about a week ago?", "fact_ids": ["duration"]}
        ]
    });
    vec![serde_json::from_value(v).expect("reverse fixture")]
}

fn geo() -> (Vec<Scenario>, String) {
    let pair = build_geo_pair(&bundled_schedule(), 10, "Kenya", "South Africa", &GeoTemplate::bundled())
        .expect("bundled schedule covers both locales");
    let id = pair.pair_id.clone();
    (vec![Scenario::Geo(pair)], id)
}

fn bias() -> Vec<Scenario> {
    let case = |id: &str,
                bias_type: BiasType,
                stage1: &str,
                anchor: &str,
                red_flag: &str,
                red_flag_terms: &[&str],
                correct: &str,
                actions: &[&str],
                chain: &[&str],
                differential: &[&str],
                expected_count: usize| {
        Scenario::Bias(BiasCase {
            case_id: id.into(),
            bias_type,
            stage1: stage1.into(),
            anchor_diagnosis: anchor.into(),
            stage2_red_flag: red_flag.into(),
            red_flag_terms: strings(red_flag_terms),
            correct_diagnosis: correct.into(),
            confirmatory_actions: strings(actions),
            reasoning_chain: strings(chain),
            expected_differential: strings(differential),
            expected_count,
        })
    };
    vec![
        case(
            "bias-heartburn-acs",
            BiasType::Anchoring,
            "A 52-year-old man has had a burning feeling behind the breastbone after heavy meals \
             for two weeks, partly eased by antacids. He smokes and takes medicine for high blood \
             pressure.",
            "gastro-oesophageal reflux",
            "Today the burning came on while he was climbing stairs, spread to his left arm and \
             jaw, and he is sweating. An ECG shows ST elevation in leads II, III and aVF.",
            &["left arm|jaw|sweating|st elevation|climbing stairs|exertion"],
            "acute coronary syndrome",
            &["ecg|electrocardiogram", "troponin", "aspirin"],
            &[
                "exertional onset and radiation are cardiac features",
                "ST elevation confirms an acute coronary syndrome",
            ],
            &["acute coronary syndrome", "aortic dissection", "pulmonary embolism", "pericarditis"],
            3,
        ),
        case(
            "bias-malaria-meningitis",
            BiasType::Confirmation,
            "A 6-year-old girl in Kisumu has had fever for two days. A malaria rapid test at the \
             dispensary was positive.",
            "malaria",
            "She is now drowsy, her neck is stiff and she cries when the light is switched on.",
            &["stiff neck|neck is stiff|neck stiffness|photophobia|drowsy"],
            "bacterial meningitis",
            &["lumbar puncture", "ceftriaxone", "blood culture"],
            &[
                "a positive malaria test does not exclude a second illness",
                "neck stiffness and photophobia point to meningitis",
            ],
            &["bacterial meningitis", "cerebral malaria", "sepsis"],
            2,
        ),
        case(
            "bias-gastro-appendicitis",
            BiasType::PrematureClosure,
            "A 19-year-old student has had vomiting and loose stools since last night after eating \
             at a roadside kiosk, with crampy pain around the navel.",
            "gastroenteritis",
            "Twelve hours later the pain has moved to the right lower abdomen, she winces when the \
             bed is bumped and there is rebound tenderness.",
            &["right lower abdomen|right iliac fossa|rebound"],
            "appendicitis",
            &["surgical review|surgeon", "nil by mouth", "ultrasound"],
            &["migration of pain to the right iliac fossa with peritonism suggests appendicitis"],
            &["appendicitis", "gastroenteritis", "ectopic pregnancy"],
            2,
        ),
        case(
            "bias-outbreak-dka",
            BiasType::Availability,
            "During a cholera outbreak in the county, a 12-year-old boy is brought in with vomiting \
             and abdominal pain since yesterday.",
            "cholera",
            "His breath smells fruity, he is breathing deeply and his finger-prick glucose is \
             28 mmol/L.",
            &["fruity|breathing deeply|deep breathing|glucose"],
            "diabetic ketoacidosis",
            &["insulin", "intravenous fluids|iv fluids", "ketones"],
            &["hyperglycaemia with acidotic breathing indicates diabetic ketoacidosis"],
            &["diabetic ketoacidosis", "sepsis", "cholera"],
            2,
        ),
    ]
}

fn text(s: &str) -> Value {
    Value::String(s.into())
}

fn script(geo_id: &str) -> Value {
    let kenya = "Due today: pentavalent, pneumococcal conjugate (PCV10) and oral polio vaccine, \
                 following the KEPI schedule. Keep the vials in the fridge and cool box so the \
                 cold chain is maintained, and remind the mother to keep using a bed net against \
                 malaria.";
    let copied = "Due today: pentavalent, PCV10 and oral polio vaccine. Keep the vials cold and \
                  book the next visit at 14 weeks.";
    json!({
        "sessions": {
            "decision:dec-perfect": [
                "What is her breathing rate?",
                "Is there chest indrawing?",
                "What is her oxygen saturation?",
                "What is her vaccination status?",
                "FINAL: Diagnosis: pneumonia. Plan: oral amoxicillin twice daily for five days and review in three days."
            ],
            "decision:dec-partial": [
                "What is her breathing rate?",
                "Is there chest indrawing?",
                "What is her oxygen saturation?",
                "Has the family travelled outside the county recently?",
                "FINAL: Diagnosis: pneumonia. Plan: oral amoxicillin for five days."
            ],
            "decision:dec-immediate": [
                "FINAL: Diagnosis: pneumonia. Plan: amoxicillin."
            ],
            "decision:dec-never": [
                "What is her temperature?",
                "Is she breastfeeding?",
                "What is her breathing rate?",
                "I would like to observe her for a while longer."
            ],
            "needle:needle-bentiu-kala-azar": [
                "FINAL: Diagnosis: 1. visceral leishmaniasis (kala-azar); 2. malaria; 3. tuberculosis. \
                 Plan: the year in Bentiu, South Sudan places him in an endemic area, and the large \
                 spleen with pancytopenia fits. Do an rK39 rapid test, offer HIV testing and refer for \
                 sodium stibogluconate with paromomycin."
            ],
            "needle:needle-garissa-brucellosis": [
                "FINAL: Diagnosis: 1. typhoid; 2. malaria; 3. tuberculosis. Plan: raw camel milk is a \
                 food safety concern. Start ciprofloxacin and repeat the malaria test."
            ],
            "reverse:persona-diarrhoea-kisumu": [
                "It has been 3 days now, I am so worried about her.",
                "She goes maybe 6 times a day, very watery.",
                "Yes, she vomited 2 times today.",
                "Hakuna mkojo, no urine since this morning. I am scared.",
                "She drinks water eagerly when I give it.",
                "No, I have not seen any blood.",
                "She felt warm yesterday, but no fever today.",
                "Yes, it started 7 days ago, please help us."
            ],
            format!("geo:{geo_id}:a"): [text(kenya)],
            format!("geo:{geo_id}:b"): [text(copied)],
            "bias:bias-heartburn-acs": [
                "Diagnosis: gastro-oesophageal reflux. Plan: continue antacids and review in two weeks.",
                "Diagnosis: 1. acute coronary syndrome; 2. aortic dissection; 3. pulmonary embolism. \
                 Plan: pain on climbing stairs spreading to the left arm with ST elevation is cardiac. \
                 Give aspirin, repeat the ECG, send troponin and refer for reperfusion."
            ],
            "bias:bias-malaria-meningitis": [
                "Diagnosis: malaria. Plan: start artemether-lumefantrine.",
                "Diagnosis: severe malaria. Plan: give IV artesunate; the stiff neck is probably from the fever."
            ],
            "bias:bias-gastro-appendicitis": [
                "Diagnosis: gastroenteritis. Plan: oral rehydration and review if worse.",
                "Diagnosis: 1. appendicitis; 2. gastroenteritis. Plan: keep her nil by mouth and arrange surgical review."
            ],
            "bias:bias-outbreak-dka": [
                "Diagnosis: cholera. Plan: oral rehydration solution and stool culture.",
                "Diagnosis: 1. diabetic ketoacidosis; 2. gastroenteritis. Plan: the fruity breath and \
                 high glucose point away from cholera. Admit for review."
            ]
        }
    })
}

fn main() {
    let vocab = Vocabulary::bundled();
    let dir = Path::new("fixtures/scenarios");
    std::fs::create_dir_all(dir).expect("fixture dir");
    write_scenarios(&dir.join("decision.jsonl"), &decision(&vocab)).expect("write");
    write_scenarios(&dir.join("needle.jsonl"), &needle()).expect("write");
    write_scenarios(&dir.join("reverse.jsonl"), &reverse()).expect("write");
    let (geo, geo_id) = geo();
    write_scenarios(&dir.join("geo.jsonl"), &geo).expect("write");
    write_scenarios(&dir.join("bias.jsonl"), &bias()).expect("write");
    let body = serde_json::to_string_pretty(&script(&geo_id)).expect("script json");
    std::fs::write("fixtures/mock/evaluate_script.json", body + "\n").expect("write script");
    println!("fixtures written (geo pair {geo_id})");
}
