package org.example;

import java.util.List;

public class Calc {
    private final int base;

    public Calc(int base) {
        this.base = base;
    }

    public int add(int a, int b) {
        return a + b + base;
    }

    public int scale(int value) {
        return value * base;
    }

    public double scale(double value) {
        return value * base;
    }

    public int sum(List<Integer> values) {
        int total = 0;
        for (int v : values) {
            total = add(total, v);
        }
        return total;
    }
}
