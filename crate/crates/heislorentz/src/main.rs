fn main() {
    std::process::exit(heislorentz::cli::main_impl());
}
