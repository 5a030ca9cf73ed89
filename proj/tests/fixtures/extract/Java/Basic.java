package com.example;

import java.util.List;
import java.util.Map;

public class Basic {}
