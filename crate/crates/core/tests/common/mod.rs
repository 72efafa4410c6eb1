pub mod big_oracle;
pub mod fp_oracle;
pub mod ssm_oracle;
