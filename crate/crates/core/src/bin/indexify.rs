fn main() -> std::process::ExitCode {
    indexify::cli::main()
}
