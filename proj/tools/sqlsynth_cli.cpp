// Copyright 2026 The sqlsynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface. Subcommands are filled in alongside the library
// modules; see README for usage.
#include <cstdio>

int main() {
    std::puts("sqlsynth: not yet wired");
    return 0;
}
