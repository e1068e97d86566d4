fn main() {
    std::process::exit(mforge::cli::main());
}
