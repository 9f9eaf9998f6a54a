// Every example must run to completion.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));

            #[test]
            fn runs() {
                run_example().expect(concat!(stringify!($name), " should run"));
            }
        }
    };
}

example!(smooth_blend);
example!(kdac_curve);
example!(gradient_check);
example!(compare_activations);
example!(timing);
example!(train_regression);
example!(train_tagging);
