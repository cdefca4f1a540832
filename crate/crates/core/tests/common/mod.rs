pub mod eval_oracle;
