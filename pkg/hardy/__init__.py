# SPDX-License-Identifier: BSD-3-Clause
# Copyright(c) 2024 Ericsson AB

name = "hardy"
