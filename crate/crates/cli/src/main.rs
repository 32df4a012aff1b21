fn main() { std::process::exit(kforge_cli::main_with_args(std::env::args_os())) }
