use proptest::prelude::*;
use rand::Rng;
use termkit::corpus::{decode_iob, encode_iob, write_iob, Document, IobRow, TermOccurrence};
use termkit_oracle::fixtures::rng;

/// Whitespace-joined tokens and a random set of disjoint token-aligned spans.
fn random_case(seed: u64) -> (Document, Vec<TermOccurrence>) {
    let mut rng = rng(seed);
    let words = ["wind", "turbine", "Blatt", "rotor-blade", "ß", "naïve", "x", "3.5", "(gear)"];
    let n = rng.gen_range(1..=30);
    let tokens: Vec<&str> = (0..n).map(|_| words[rng.gen_range(0..words.len())]).collect();
    let text = tokens.join(" ");

    let mut starts = Vec::with_capacity(n);
    let mut pos = 0;
    for t in &tokens {
        starts.push(pos);
        pos += t.chars().count() + 1;
    }
    let mut occurrences = Vec::new();
    let mut i = 0;
    while i < n {
        if rng.gen_bool(0.35) {
            let len = rng.gen_range(1..=3).min(n - i);
            let start = starts[i];
            let end = starts[i + len - 1] + tokens[i + len - 1].chars().count();
            let surface = tokens[i..i + len].join(" ");
            occurrences.push(TermOccurrence::new(surface, start, end));
            i += len;
        } else {
            i += 1;
        }
    }
    (Document::new(format!("doc{seed}"), text), occurrences)
}

#[test]
fn five_hundred_random_span_sets_round_trip() {
    for seed in 0..500 {
        let (doc, occurrences) = random_case(seed);
        let rows = encode_iob(&doc, &occurrences).unwrap();
        let mut buf = Vec::new();
        write_iob([(doc.id.as_str(), rows.as_slice())], &mut buf).unwrap();
        let decoded = decode_iob(std::str::from_utf8(&buf).unwrap(), "unused").unwrap();
        assert!(decoded.diagnostics.is_empty());
        assert_eq!(decoded.documents.len(), 1);
        let back = &decoded.documents[0];
        assert_eq!(back.id, doc.id);
        assert_eq!(back.text, doc.text);
        assert_eq!(back.occurrences, occurrences, "seed {seed}");
    }
}

#[test]
fn several_documents_round_trip() {
    let cases: Vec<_> = (0..20).map(random_case).collect();
    let rows: Vec<Vec<IobRow>> = cases.iter().map(|(d, o)| encode_iob(d, o).unwrap()).collect();
    let mut buf = Vec::new();
    write_iob(cases.iter().zip(&rows).map(|((d, _), r)| (d.id.as_str(), r.as_slice())), &mut buf).unwrap();
    let decoded = decode_iob(std::str::from_utf8(&buf).unwrap(), "x").unwrap();
    for ((doc, occ), back) in cases.iter().zip(&decoded.documents) {
        assert_eq!(&back.text, &doc.text);
        assert_eq!(&back.occurrences, occ);
    }
}

proptest! {
    #[test]
    fn decoding_arbitrary_tags_never_panics(tags in proptest::collection::vec(0u8..4, 0..40)) {
        let mut input = String::new();
        for (i, t) in tags.iter().enumerate() {
            match t {
                0 => input.push_str(&format!("t{i}\tB-TERM\n")),
                1 => input.push_str(&format!("t{i}\tI-TERM\n")),
                2 => input.push_str(&format!("t{i}\tO\n")),
                _ => input.push('\n'),
            }
        }
        let decoded = decode_iob(&input, "p").unwrap();
        for doc in &decoded.documents {
            let rows = encode_iob(&doc.to_document(), &doc.occurrences).unwrap();
            let mut buf = Vec::new();
            write_iob([(doc.id.as_str(), rows.as_slice())], &mut buf).unwrap();
            let again = decode_iob(std::str::from_utf8(&buf).unwrap(), "p").unwrap();
            prop_assert_eq!(&again.documents[0].occurrences, &doc.occurrences);
        }
    }
}
