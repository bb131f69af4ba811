fn main() {
    std::process::exit(tensor_derivs::cli::main_with_args(std::env::args_os()));
}
