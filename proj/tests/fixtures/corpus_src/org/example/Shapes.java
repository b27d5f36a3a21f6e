package org.example;

public class Shapes {
    public static double area(double w, double h) {
        return Helper.mul(w, h);
    }
}

class Helper {
    static double mul(double a, double b) {
        return a * b;
    }
}
