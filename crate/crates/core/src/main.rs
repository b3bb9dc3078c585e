fn main() { std::process::exit(pem_detect::cli::main()) }
